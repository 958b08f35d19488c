//! Experiment configuration: built-in defaults per experiment, a flat
//! `key=value` config-file format, and single-key overrides. A config fully
//! determines a run; identical configs produce byte-identical output files.

use std::path::PathBuf;

use crate::momentum::HBConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Phase,
    Cubic,
    Saddle,
    Eig,
    Lemmas,
    GradCheck,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Phase => "phase",
            Experiment::Cubic => "cubic",
            Experiment::Saddle => "saddle",
            Experiment::Eig => "eig",
            Experiment::Lemmas => "lemmas",
            Experiment::GradCheck => "gradcheck",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(Experiment::Phase),
            "cubic" => Ok(Experiment::Cubic),
            "saddle" => Ok(Experiment::Saddle),
            "eig" => Ok(Experiment::Eig),
            "lemmas" => Ok(Experiment::Lemmas),
            "gradcheck" => Ok(Experiment::GradCheck),
            other => Err(Error::InvalidConfig(format!("unknown experiment '{other}'"))),
        }
    }
}

/// One entry of a β sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Constant(f64),
    /// β = 1 until the relative objective drop reaches `threshold`, then
    /// `beta_lo` with the momentum reset.
    Switch { beta_lo: f64, threshold: f64 },
}

impl BetaSpec {
    /// Token syntax: a float, or `switch[:beta_lo[:threshold]]`
    /// (defaults 0.9 and 0.5).
    pub fn parse(token: &str) -> Result<Self> {
        if let Some(rest) = token.strip_prefix("switch") {
            let mut beta_lo = 0.9;
            let mut threshold = 0.5;
            let parts: Vec<&str> = rest.split(':').filter(|p| !p.is_empty()).collect();
            if parts.len() > 2 {
                return Err(Error::InvalidConfig(format!("bad beta token '{token}'")));
            }
            if let Some(p) = parts.first() {
                beta_lo = parse_f64(p, "beta_lo")?;
            }
            if let Some(p) = parts.get(1) {
                threshold = parse_f64(p, "threshold")?;
            }
            Ok(BetaSpec::Switch { beta_lo, threshold })
        } else {
            Ok(BetaSpec::Constant(parse_f64(token, "beta")?))
        }
    }

    /// Filename-friendly label: `0.3`, or `1to0.9` for a switch entry.
    pub fn label(&self) -> String {
        match self {
            BetaSpec::Constant(b) => format!("{b}"),
            BetaSpec::Switch { beta_lo, .. } => format!("1to{beta_lo}"),
        }
    }

    pub fn config(&self, eta: f64) -> Result<HBConfig> {
        match *self {
            BetaSpec::Constant(b) => HBConfig::constant(eta, b),
            BetaSpec::Switch { beta_lo, threshold } => HBConfig::switch(eta, beta_lo, threshold),
        }
    }

    /// The β used in closed-form references (post-switch value for
    /// switch entries).
    pub fn reference_beta(&self) -> f64 {
        match *self {
            BetaSpec::Constant(b) => b,
            BetaSpec::Switch { beta_lo, .. } => beta_lo,
        }
    }
}

/// Which objectives a gradient check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradCheckProblem {
    Phase,
    Cubic,
    Saddle,
}

impl GradCheckProblem {
    pub fn name(&self) -> &'static str {
        match self {
            GradCheckProblem::Phase => "phase",
            GradCheckProblem::Cubic => "cubic",
            GradCheckProblem::Saddle => "saddle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(GradCheckProblem::Phase),
            "cubic" => Ok(GradCheckProblem::Cubic),
            "saddle" => Ok(GradCheckProblem::Saddle),
            other => Err(Error::InvalidConfig(format!(
                "unknown gradcheck problem '{other}'"
            ))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub betas: Vec<BetaSpec>,
    pub eta: f64,
    pub t_max: usize,
    pub zeta: f64,
    pub delta: f64,
    pub d: usize,
    pub n: usize,
    // cubic instance family
    pub rho: f64,
    pub norm_wstar: f64,
    pub norm_a: f64,
    pub gamma: f64,
    pub gap: f64,
    pub r0: f64,
    pub perturb_b: bool,
    // lemmas
    pub trials: usize,
    // gradcheck
    pub problems: Vec<GradCheckProblem>,
    pub count: usize,
    pub h: f64,
    pub tol: Option<f64>,
    // eig
    pub etas: Vec<f64>,
    pub out_dir: PathBuf,
}

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HEAVYBALL_OUT";

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl ExperimentConfig {
    /// Built-in defaults reproducing the standard figure setups.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            seed: 1,
            betas: vec![
                BetaSpec::Constant(0.0),
                BetaSpec::Constant(0.3),
                BetaSpec::Constant(0.5),
                BetaSpec::Constant(0.7),
                BetaSpec::Constant(0.9),
            ],
            eta: 5e-4,
            t_max: 20_000,
            zeta: 0.1,
            delta: 0.1,
            d: 10,
            n: 200,
            rho: 1.0,
            norm_wstar: 1.0,
            norm_a: 1.0,
            gamma: 0.2,
            gap: 5e-3,
            r0: 1e-3,
            perturb_b: false,
            trials: 10_000,
            problems: vec![
                GradCheckProblem::Phase,
                GradCheckProblem::Cubic,
                GradCheckProblem::Saddle,
            ],
            count: 100,
            h: 1e-6,
            tol: None,
            etas: vec![1e-2, 5e-3, 1e-3, 5e-4],
            out_dir: default_out_dir(),
        };
        match experiment {
            Experiment::Phase => ExperimentConfig {
                betas: vec![
                    BetaSpec::Constant(0.0),
                    BetaSpec::Constant(0.3),
                    BetaSpec::Constant(0.5),
                    BetaSpec::Constant(0.7),
                    BetaSpec::Constant(0.9),
                    BetaSpec::Switch {
                        beta_lo: 0.9,
                        threshold: 0.5,
                    },
                ],
                ..base
            },
            Experiment::Cubic => ExperimentConfig {
                eta: 0.01,
                t_max: 6000,
                d: 4,
                ..base
            },
            Experiment::Saddle => ExperimentConfig {
                eta: 0.1,
                t_max: 5000,
                n: 10,
                betas: vec![
                    BetaSpec::Constant(0.0),
                    BetaSpec::Constant(0.5),
                    BetaSpec::Constant(0.9),
                ],
                ..base
            },
            Experiment::Eig => ExperimentConfig {
                t_max: 200_000,
                d: 10,
                ..base
            },
            Experiment::Lemmas | Experiment::GradCheck => base,
        }
    }

    /// Applies one `key=value` override.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = Experiment::parse(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad seed '{value}'")))?
            }
            "beta" | "betas" => {
                self.betas = value
                    .split(',')
                    .map(|t| BetaSpec::parse(t.trim()))
                    .collect::<Result<_>>()?;
                if self.betas.is_empty() {
                    return Err(Error::InvalidConfig("empty beta list".into()));
                }
            }
            "eta" => self.eta = parse_f64(value, key)?,
            "T" | "t_max" => {
                self.t_max = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad T '{value}'")))?
            }
            "zeta" => self.zeta = parse_f64(value, key)?,
            "delta" => self.delta = parse_f64(value, key)?,
            "d" => {
                self.d = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad d '{value}'")))?
            }
            "n" => {
                self.n = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad n '{value}'")))?
            }
            "rho" => self.rho = parse_f64(value, key)?,
            "norm_wstar" => self.norm_wstar = parse_f64(value, key)?,
            "norm_a" => self.norm_a = parse_f64(value, key)?,
            "gamma" => self.gamma = parse_f64(value, key)?,
            "gap" => self.gap = parse_f64(value, key)?,
            "r0" => self.r0 = parse_f64(value, key)?,
            "perturb_b" => {
                self.perturb_b = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad perturb_b '{value}'")))?
            }
            "trials" => {
                self.trials = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad trials '{value}'")))?
            }
            "problems" => {
                self.problems = value
                    .split(',')
                    .map(|t| GradCheckProblem::parse(t.trim()))
                    .collect::<Result<_>>()?
            }
            "count" => {
                self.count = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad count '{value}'")))?
            }
            "h" => self.h = parse_f64(value, key)?,
            "tol" => {
                self.tol = if value == "none" {
                    None
                } else {
                    Some(parse_f64(value, key)?)
                }
            }
            "etas" => {
                self.etas = value
                    .split(',')
                    .map(|t| parse_f64(t.trim(), "etas"))
                    .collect::<Result<_>>()?
            }
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(Error::InvalidConfig(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Parses a flat config file: one `key=value` per line, `#` comments
    /// and blank lines ignored.
    pub fn apply_file(&mut self, contents: &str) -> Result<()> {
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                )));
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidConfig(format!("bad {what} '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_token_parsing() {
        assert_eq!(BetaSpec::parse("0.3").unwrap(), BetaSpec::Constant(0.3));
        assert_eq!(
            BetaSpec::parse("switch").unwrap(),
            BetaSpec::Switch {
                beta_lo: 0.9,
                threshold: 0.5
            }
        );
        assert_eq!(
            BetaSpec::parse("switch:0.7:0.4").unwrap(),
            BetaSpec::Switch {
                beta_lo: 0.7,
                threshold: 0.4
            }
        );
        assert!(BetaSpec::parse("fast").is_err());
        assert_eq!(BetaSpec::Constant(0.3).label(), "0.3");
        assert_eq!(
            BetaSpec::Switch {
                beta_lo: 0.9,
                threshold: 0.5
            }
            .label(),
            "1to0.9"
        );
    }

    #[test]
    fn defaults_match_figure_setups() {
        let phase = ExperimentConfig::defaults(Experiment::Phase);
        assert_eq!(phase.d, 10);
        assert_eq!(phase.n, 200);
        assert_eq!(phase.eta, 5e-4);
        assert_eq!(phase.betas.len(), 6);
        assert_eq!(phase.zeta, 0.1);

        let cubic = ExperimentConfig::defaults(Experiment::Cubic);
        assert_eq!(cubic.eta, 0.01);
        assert_eq!(cubic.d, 4);
        assert_eq!(cubic.gamma, 0.2);
        assert_eq!(cubic.gap, 5e-3);
        assert_eq!(cubic.delta, 0.1);

        let saddle = ExperimentConfig::defaults(Experiment::Saddle);
        assert_eq!(saddle.n, 10);

        let eig = ExperimentConfig::defaults(Experiment::Eig);
        assert_eq!(eig.etas, vec![1e-2, 5e-3, 1e-3, 5e-4]);
    }

    #[test]
    fn config_file_parsing_and_unknown_keys() {
        let mut config = ExperimentConfig::defaults(Experiment::Phase);
        config
            .apply_file("# comment\nseed=7\neta=1e-3\nbeta=0,0.9,switch:0.8\n\nT=500\n")
            .unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.eta, 1e-3);
        assert_eq!(config.t_max, 500);
        assert_eq!(config.betas.len(), 3);

        assert!(matches!(
            config.apply_kv("bogus", "1"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(config.apply_file("seed").is_err());
    }
}
