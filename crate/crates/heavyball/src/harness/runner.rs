//! Experiment orchestration: builds instances from derived seed streams,
//! sweeps β (in parallel, with deterministic collection order), writes one
//! CSV per trace plus a line-oriented `key=value` summary, and reports
//! violations of the built-in checks.

use std::path::PathBuf;

use crate::cubic::{self, CubicInstance, InstanceParams};
use crate::dynamics::{
    plus_one_closed_form_floor, simulate, verify_decay, verify_growth, verify_growth_plus_one,
    RecursionMode, RecursionSpec, VERIFY_SLACK,
};
use crate::experiments::{self, first_passage, iterations_to_distance};
use crate::harness::config::{BetaSpec, Experiment, ExperimentConfig, GradCheckProblem};
use crate::harness::csvio::{
    fmt_g17, write_cubic_csv, write_eig_csv, write_phase_csv, write_saddle_csv,
};
use crate::harness::gradcheck::max_rel_error;
use crate::momentum::{self, HbForm, RunOutcome, Trace, TraceRecord};
use crate::numkit::{derive_seed, gauss_vec, norm, Rng, SymMat};
use crate::par;
use crate::phase::{self, EXTRA_DIST};
use crate::{Error, Result};

/// Everything one experiment run produced.
#[derive(Debug)]
pub struct ExperimentOutput {
    /// CSV files written, in a deterministic order.
    pub files: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: String,
    /// Failed built-in checks; empty means a clean run.
    pub violations: Vec<String>,
}

impl ExperimentOutput {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Line-oriented summary builder.
#[derive(Default)]
struct Summary {
    lines: Vec<String>,
}

impl Summary {
    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key}={value}"));
    }
    fn push_f64(&mut self, key: &str, value: f64) {
        self.lines.push(format!("{key}={}", fmt_g17(value)));
    }
    fn push_opt(&mut self, key: &str, value: Option<impl std::fmt::Display>) {
        match value {
            Some(v) => self.push(key, v),
            None => self.push(key, "none"),
        }
    }
    fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn outcome_label(outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Completed => "completed".to_string(),
        RunOutcome::EarlyStopped { t } => format!("early_stopped@{t}"),
        RunOutcome::Failed { t, error } => format!("failed@{t}:{error}"),
    }
}

/// Runs the configured experiment, writing outputs under `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    std::fs::create_dir_all(&config.out_dir)?;
    match config.experiment {
        Experiment::Phase => phase_experiment(config),
        Experiment::Cubic => cubic_experiment(config),
        Experiment::Saddle => saddle_experiment(config),
        Experiment::Eig => eig_experiment(config),
        Experiment::Lemmas => lemmas_experiment(config),
        Experiment::GradCheck => gradcheck_experiment(config),
    }
}

fn write_summary(
    config: &ExperimentConfig,
    summary: &Summary,
    files: Vec<PathBuf>,
    violations: Vec<String>,
) -> Result<ExperimentOutput> {
    let summary_path = config
        .out_dir
        .join(format!("{}_summary.txt", config.experiment.name()));
    let text = summary.text();
    std::fs::write(&summary_path, &text)?;
    Ok(ExperimentOutput {
        files,
        summary_path,
        summary: text,
        violations,
    })
}

struct PhaseBetaResult {
    label: String,
    trace: Trace,
    report: phase::StageReport,
    c_n_hat: Option<f64>,
    nu_hat: Option<f64>,
}

fn phase_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut inst_rng = Rng::new(derive_seed(config.seed, "phase/instance"));
    let instance = phase::sample_instance(&mut inst_rng, config.d, config.n);
    let mut init_rng = Rng::new(derive_seed(config.seed, "phase/init"));
    let (w0, resamples) = phase::sample_w0(&mut init_rng, config.d);

    let hb_configs: Vec<_> = config
        .betas
        .iter()
        .map(|b| b.config(config.eta))
        .collect::<Result<_>>()?;

    let results: Vec<PhaseBetaResult> = par::map_indexed(config.betas.len(), |i| {
        let spec = &config.betas[i];
        let hb = hb_configs[i];
        let stop = |r: &TraceRecord| r.extras[EXTRA_DIST] < 1e-13;
        let (trace, iterates) =
            momentum::run_recorded(&instance, &w0, &hb, HbForm::Iterate, config.t_max, &stop);
        let ref_beta = spec.reference_beta();
        // entry time does not depend on c_n; scan once to fix the
        // perturbation horizon, then rescan with the measured c_n_hat
        let t_zeta =
            phase::stage_report(&trace, config.zeta, 0.0, config.eta, ref_beta, config.d).t_zeta;
        let c_n_hat = match spec {
            BetaSpec::Constant(b) => Some(
                phase::extract_perturbations(&iterates, config.eta, *b, instance.w_star(), t_zeta)
                    .c_n_hat,
            ),
            // the switch run changes beta mid-flight; the fixed-beta
            // recursion does not describe it
            BetaSpec::Switch { .. } => None,
        };
        let report = phase::stage_report(
            &trace,
            config.zeta,
            c_n_hat.unwrap_or(0.0),
            config.eta,
            ref_beta,
            config.d,
        );
        let nu_hat = report
            .t_zeta
            .and_then(|tz| phase::empirical_linear_rate(&trace, tz));
        PhaseBetaResult {
            label: spec.label(),
            trace,
            report,
            c_n_hat,
            nu_hat,
        }
    });

    let mut summary = Summary::default();
    summary.push("experiment", "phase");
    summary.push("seed", config.seed);
    summary.push_f64("eta", config.eta);
    summary.push("d", config.d);
    summary.push("n", config.n);
    summary.push_f64("zeta", config.zeta);
    summary.push("w0_resamples", resamples);

    let mut files = Vec::new();
    let mut violations = Vec::new();
    for r in &results {
        let path = config.out_dir.join(format!("phase_beta{}.csv", r.label));
        write_phase_csv(&path, &r.trace)?;
        files.push(path);

        let k = format!("beta{}", r.label);
        summary.push(&format!("{k}.outcome"), outcome_label(&r.trace.outcome));
        summary.push(&format!("{k}.records"), r.trace.len());
        summary.push_opt(&format!("{k}.t0"), r.report.t0);
        summary.push_opt(&format!("{k}.tb"), r.report.tb);
        summary.push_opt(&format!("{k}.ta"), r.report.ta);
        summary.push_opt(&format!("{k}.t_zeta"), r.report.t_zeta);
        summary.push_f64(&format!("{k}.theory_t_zeta"), r.report.theory_t_zeta);
        summary.push_opt(&format!("{k}.c_n_hat"), r.c_n_hat.map(fmt_g17));
        summary.push_f64(&format!("{k}.c_m_hat"), r.report.c_m_hat);
        summary.push_opt(&format!("{k}.nu_hat"), r.nu_hat.map(fmt_g17));
        summary.push_f64(&format!("{k}.final_dist"), r.trace.last().extras[EXTRA_DIST]);

        if r.trace.failed() {
            violations.push(format!(
                "phase beta{}: {}",
                r.label,
                outcome_label(&r.trace.outcome)
            ));
        }
    }

    write_summary(config, &summary, files, violations)
}

struct CubicBetaResult {
    label: String,
    trace: Trace,
    report: cubic::DeltaReport,
    rate: Option<cubic::RateFit>,
    norm_monotone: bool,
    bound_applicable: bool,
}

fn cubic_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = InstanceParams {
        d: config.d,
        rho: config.rho,
        norm_wstar: config.norm_wstar,
        norm_a: config.norm_a,
        gamma: config.gamma,
        gap: config.gap,
    };
    let mut inst_rng = Rng::new(derive_seed(config.seed, "cubic/instance"));
    let mut instance = cubic::generate_instance(&mut inst_rng, &params)?;
    let mut b1_perturbed = false;
    if instance.b1().abs() < 1e-14 && config.perturb_b {
        // degenerate b1 leaves the bound undefined; optionally nudge b
        let mut perturb_rng = Rng::new(derive_seed(config.seed, "cubic/perturb"));
        let noise = gauss_vec(&mut perturb_rng, config.d, 1e-8);
        let b: Vec<f64> = instance.b().iter().zip(&noise).map(|(a, e)| a + e).collect();
        instance = CubicInstance::new(instance.a().clone(), b, config.rho)?;
        b1_perturbed = true;
    }

    let b = instance.b().to_vec();
    let nb = norm(&b);
    let w0: Vec<f64> = b.iter().map(|v| -config.r0 * v / nb).collect();
    let eta_bound = 1.0 / (instance.eig().spectral_norm()
        + instance.rho() * instance.w_star().map_or(0.0, norm));

    let hb_configs: Vec<_> = config
        .betas
        .iter()
        .map(|b| b.config(config.eta))
        .collect::<Result<_>>()?;

    let results: Vec<CubicBetaResult> = par::map_indexed(config.betas.len(), |i| {
        let spec = &config.betas[i];
        let hb = hb_configs[i];
        // past ~1e-13 the gap is subtraction noise; stopping there keeps the
        // tail half of the trace inside the linear-decay regime the rate
        // fit expects
        let stop = |r: &TraceRecord| {
            instance.f_star().is_some() && r.extras[cubic::EXTRA_F_GAP] <= 1e-13
        };
        let trace = momentum::run(&instance, &w0, &hb, HbForm::Iterate, config.t_max, &stop);
        let ref_beta = spec.reference_beta();
        let report = cubic::measure_t_delta(&trace, &instance, config.delta, config.eta, ref_beta);
        let rate = cubic::empirical_rate_cubic(&trace, &instance);
        let norm_monotone = norm_monotone_until_near(&trace, config.norm_wstar, 1e-3);
        // the closed-form bound assumes a fixed beta and eta below the
        // stability threshold
        let bound_applicable =
            matches!(spec, BetaSpec::Constant(_)) && config.eta <= eta_bound + 1e-15;
        CubicBetaResult {
            label: spec.label(),
            trace,
            report,
            rate,
            norm_monotone,
            bound_applicable,
        }
    });

    let mut summary = Summary::default();
    summary.push("experiment", "cubic");
    summary.push("seed", config.seed);
    summary.push_f64("eta", config.eta);
    summary.push_f64("delta", config.delta);
    summary.push("d", config.d);
    summary.push_f64("rho", config.rho);
    summary.push_f64("gamma", instance.gamma());
    summary.push_f64("gap", config.gap);
    summary.push_f64("b1", instance.b1());
    summary.push("b1_perturbed", b1_perturbed);

    let mut files = Vec::new();
    let mut violations = Vec::new();
    for r in &results {
        let path = config.out_dir.join(format!("cubic_beta{}.csv", r.label));
        write_cubic_csv(&path, &r.trace)?;
        files.push(path);

        let k = format!("beta{}", r.label);
        summary.push(&format!("{k}.outcome"), outcome_label(&r.trace.outcome));
        summary.push_opt(&format!("{k}.t_delta"), r.report.t_delta_measured);
        summary.push_opt(&format!("{k}.t_delta_bound"), r.report.t_delta_bound.map(fmt_g17));
        summary.push_opt(&format!("{k}.nu_hat"), r.rate.map(|f| fmt_g17(f.nu)));
        summary.push(
            &format!("{k}.envelope_fit"),
            r.rate.is_some_and(|f| f.envelope),
        );
        summary.push(&format!("{k}.norm_monotone"), r.norm_monotone);

        if r.trace.failed() {
            violations.push(format!(
                "cubic beta{}: {}",
                r.label,
                outcome_label(&r.trace.outcome)
            ));
        }
        if r.bound_applicable {
            if let (Some(measured), Some(bound)) =
                (r.report.t_delta_measured, r.report.t_delta_bound)
            {
                let ok = (measured as f64) <= bound.ceil();
                summary.push(&format!("{k}.bound_ok"), ok);
                if !ok {
                    violations.push(format!(
                        "cubic beta{}: T_delta {} exceeds bound {}",
                        r.label, measured, bound
                    ));
                }
            }
        }
    }

    write_summary(config, &summary, files, violations)
}

/// Non-decreasing `||w_t||` (slack 1e-9 per step) until within `tol` of the
/// target norm.
fn norm_monotone_until_near(trace: &Trace, target: f64, tol: f64) -> bool {
    for pair in trace.records.windows(2) {
        if (pair[0].norm_w - target).abs() <= tol {
            return true;
        }
        if pair[1].norm_w < pair[0].norm_w - 1e-9 {
            return false;
        }
    }
    true
}

fn saddle_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut inst_rng = Rng::new(derive_seed(config.seed, "saddle/instance"));
    let instance = experiments::sample_saddle(&mut inst_rng, config.n);

    let hb_configs: Vec<_> = config
        .betas
        .iter()
        .map(|b| b.config(config.eta))
        .collect::<Result<_>>()?;

    let results: Vec<(String, Trace, Option<usize>)> =
        par::map_indexed(config.betas.len(), |i| {
            let trace = experiments::saddle_escape_run(&instance, &hb_configs[i], config.t_max);
            let passage = first_passage(&trace, 0.01);
            (config.betas[i].label(), trace, passage)
        });

    let mut summary = Summary::default();
    summary.push("experiment", "saddle");
    summary.push("seed", config.seed);
    summary.push_f64("eta", config.eta);
    summary.push("n", config.n);
    summary.push_f64("x_bar1", instance.x_bar()[0]);
    summary.push_f64("x_bar2", instance.x_bar()[1]);

    let mut files = Vec::new();
    let mut violations = Vec::new();
    for (label, trace, passage) in &results {
        let path = config.out_dir.join(format!("saddle_beta{label}.csv"));
        write_saddle_csv(&path, trace)?;
        files.push(path);

        let k = format!("beta{label}");
        summary.push(&format!("{k}.outcome"), outcome_label(&trace.outcome));
        summary.push_opt(&format!("{k}.first_passage"), *passage);
        summary.push_f64(&format!("{k}.final_f"), trace.last().f);
        if trace.failed() {
            violations.push(format!(
                "saddle beta{label}: {}",
                outcome_label(&trace.outcome)
            ));
        }
    }

    write_summary(config, &summary, files, violations)
}

fn eig_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let betas: Vec<f64> = config
        .betas
        .iter()
        .map(|b| match b {
            BetaSpec::Constant(v) => Ok(*v),
            BetaSpec::Switch { .. } => Err(Error::InvalidConfig(
                "eig runs take constant beta values only".into(),
            )),
        })
        .collect::<Result<_>>()?;

    let mut mat_rng = Rng::new(derive_seed(config.seed, "eig/matrix"));
    let b_rows: Vec<Vec<f64>> = (0..config.d)
        .map(|_| gauss_vec(&mut mat_rng, config.d, 1.0))
        .collect();
    let a = SymMat::gram(&b_rows);

    let mut init_rng = Rng::new(derive_seed(config.seed, "eig/init"));
    let mut w0 = gauss_vec(&mut init_rng, config.d, 1.0);
    let mut init_resamples = 0;
    while let Err(Error::OrthogonalStart { .. }) = experiments::eig_hb_run(&a, 1.0, 0.0, &w0, 0) {
        w0 = gauss_vec(&mut init_rng, config.d, 1.0);
        init_resamples += 1;
        if init_resamples > 100 {
            return Err(Error::InvalidConfig(
                "could not draw a start vector overlapping the top eigenvector".into(),
            ));
        }
    }

    let grid: Vec<(f64, f64)> = config
        .etas
        .iter()
        .flat_map(|&eta| betas.iter().map(move |&beta| (eta, beta)))
        .collect();

    let runs: Vec<Result<(Vec<f64>, Option<usize>)>> = par::map_indexed(grid.len(), |i| {
        let (eta, beta) = grid[i];
        let run = experiments::eig_hb_run(&a, eta, beta, &w0, config.t_max)?;
        let iters = iterations_to_distance(&run, 1e-3);
        Ok((run.dists, iters))
    });

    let mut summary = Summary::default();
    summary.push("experiment", "eig");
    summary.push("seed", config.seed);
    summary.push("d", config.d);
    summary.push("init_resamples", init_resamples);

    let mut files = Vec::new();
    let violations = Vec::new();
    let mut iter_counts = std::collections::BTreeMap::new();
    for (i, run) in runs.into_iter().enumerate() {
        let (eta, beta) = grid[i];
        let (dists, iters) = run?;
        let path = config
            .out_dir
            .join(format!("eig_eta{eta}_beta{beta}.csv"));
        write_eig_csv(&path, &dists)?;
        files.push(path);
        let k = format!("eta{eta}.beta{beta}");
        summary.push_opt(&format!("{k}.iters_to_1e-3"), iters);
        summary.push_f64(&format!("{k}.final_dist"), *dists.last().unwrap());
        iter_counts.insert((fmt_g17(eta), fmt_g17(beta)), iters);
    }

    // convenience ratio per eta: iterations at the largest beta over beta=0
    for &eta in &config.etas {
        let base = iter_counts.get(&(fmt_g17(eta), fmt_g17(0.0))).copied().flatten();
        let top_beta = betas.iter().cloned().fold(f64::NAN, f64::max);
        let top = iter_counts
            .get(&(fmt_g17(eta), fmt_g17(top_beta)))
            .copied()
            .flatten();
        if let (Some(b0), Some(bt)) = (base, top) {
            summary.push_f64(
                &format!("eta{eta}.ratio_top_beta_vs_0"),
                bt as f64 / b0 as f64,
            );
        }
    }

    write_summary(config, &summary, files, violations)
}

fn lemmas_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let trials = config.trials;
    let seed = config.seed;

    let growth: Vec<Option<String>> = par::map_indexed(trials, |i| {
        let mut rng = Rng::new(derive_seed(seed, &format!("lemmas/growth/{i}")));
        let theta = 10f64.powf(rng.uniform(-4.0, 0.0));
        let beta = rng.next_f64();
        let steps = 1 + (rng.next_u64() % 200) as usize;
        let mirror = rng.next_u64() & 1 == 1;
        let a_minus1 = 1.0 - rng.next_f64(); // (0, 1]
        let a0 = a_minus1 * (1.0 + rng.next_f64());
        let (a0, a_minus1) = if mirror { (-a0, -a_minus1) } else { (a0, a_minus1) };
        let spec = RecursionSpec {
            theta,
            beta,
            mode: RecursionMode::Growth,
            a0,
            a_minus1,
        };
        let seq = simulate(&spec, steps).expect("admissible growth spec");
        let report = verify_growth(&seq, theta, beta);
        report.first_violation.map(|t| {
            format!("growth trial {i}: violation at t={t} (theta={theta}, beta={beta})")
        })
    });

    let decay: Vec<Option<String>> = par::map_indexed(trials, |i| {
        let mut rng = Rng::new(derive_seed(seed, &format!("lemmas/decay/{i}")));
        let (theta, beta) = loop {
            let theta = 10f64.powf(rng.uniform(-4.0, 0.0));
            let beta = rng.next_f64();
            if (1.0 + beta / (1.0 - theta)) * theta < 1.0 {
                break (theta, beta);
            }
        };
        let steps = 1 + (rng.next_u64() % 200) as usize;
        let mirror = rng.next_u64() & 1 == 1;
        let b_minus1 = 1.0 - rng.next_f64();
        let b0 = b_minus1 * rng.next_f64();
        let (a0, a_minus1) = if mirror { (-b0, -b_minus1) } else { (b0, b_minus1) };
        let spec = RecursionSpec {
            theta,
            beta,
            mode: RecursionMode::Decay,
            a0,
            a_minus1,
        };
        let seq = simulate(&spec, steps).expect("admissible decay spec");
        match verify_decay(&seq, theta, beta) {
            Ok(report) => report.first_violation.map(|t| {
                format!("decay trial {i}: violation at t={t} (theta={theta}, beta={beta})")
            }),
            Err(e) => Some(format!("decay trial {i}: {e}")),
        }
    });

    let plus_one: Vec<Option<String>> = par::map_indexed(trials, |i| {
        let mut rng = Rng::new(derive_seed(seed, &format!("lemmas/plus_one/{i}")));
        let eta_delta = 10f64.powf(rng.uniform(-3.0, 0.5f64.log10()));
        let beta = rng.next_f64();
        let steps = 1 + (rng.next_u64() % 200) as usize;
        let spec = RecursionSpec {
            theta: eta_delta,
            beta,
            mode: RecursionMode::GrowthPlusOne,
            a0: 0.0,
            a_minus1: 0.0,
        };
        let seq = simulate(&spec, steps).expect("admissible plus-one spec");
        let report = verify_growth_plus_one(&seq, eta_delta, beta);
        if let Some(t) = report.first_violation {
            return Some(format!(
                "plus_one trial {i}: rate violation at t={t} (eta_delta={eta_delta}, beta={beta})"
            ));
        }
        // closed-form floor over the whole simulated prefix
        for (idx, &v) in seq.iter().enumerate().skip(1) {
            let t = idx - 1;
            let floor = plus_one_closed_form_floor(eta_delta, beta, t);
            if v < floor - VERIFY_SLACK * floor.abs().max(1.0) {
                return Some(format!(
                    "plus_one trial {i}: closed-form floor violated at t={t}"
                ));
            }
        }
        None
    });

    let mut summary = Summary::default();
    summary.push("experiment", "lemmas");
    summary.push("seed", seed);
    summary.push("trials", trials);

    let mut violations = Vec::new();
    for (name, sweep) in [("growth", growth), ("decay", decay), ("plus_one", plus_one)] {
        let bad: Vec<String> = sweep.into_iter().flatten().collect();
        summary.push(&format!("{name}.trials"), trials);
        summary.push(&format!("{name}.violations"), bad.len());
        violations.extend(bad.into_iter().take(10));
    }

    write_summary(config, &summary, Vec::new(), violations)
}

fn gradcheck_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut summary = Summary::default();
    summary.push("experiment", "gradcheck");
    summary.push("seed", config.seed);
    summary.push_f64("h", config.h);
    summary.push("count", config.count);

    let mut violations = Vec::new();
    for problem in &config.problems {
        let max_err = match problem {
            GradCheckProblem::Phase => {
                let mut rng = Rng::new(derive_seed(config.seed, "gradcheck/phase/instance"));
                let inst = phase::sample_instance(&mut rng, 10, 200);
                let mut points_rng = Rng::new(derive_seed(config.seed, "gradcheck/phase/points"));
                let points: Vec<Vec<f64>> = (0..config.count)
                    .map(|_| gauss_vec(&mut points_rng, 10, 0.5))
                    .collect();
                max_rel_error(&inst, &points, config.h)
            }
            GradCheckProblem::Cubic => {
                let mut rng = Rng::new(derive_seed(config.seed, "gradcheck/cubic/instance"));
                let inst = cubic::generate_instance(&mut rng, &InstanceParams::default())?;
                let mut points_rng = Rng::new(derive_seed(config.seed, "gradcheck/cubic/points"));
                let points: Vec<Vec<f64>> = (0..config.count)
                    .map(|_| gauss_vec(&mut points_rng, 4, 0.8))
                    .collect();
                max_rel_error(&inst, &points, config.h)
            }
            GradCheckProblem::Saddle => {
                let mut rng = Rng::new(derive_seed(config.seed, "gradcheck/saddle/instance"));
                let inst = experiments::sample_saddle(&mut rng, 10);
                let mut points_rng = Rng::new(derive_seed(config.seed, "gradcheck/saddle/points"));
                let points: Vec<Vec<f64>> = (0..config.count)
                    .map(|_| gauss_vec(&mut points_rng, 2, 0.5))
                    .collect();
                max_rel_error(&inst, &points, config.h)
            }
        };
        summary.push_f64(&format!("{}.max_rel_err", problem.name()), max_err);
        if let Some(tol) = config.tol {
            let ok = max_err <= tol;
            summary.push(&format!("{}.within_tol", problem.name()), ok);
            if !ok {
                violations.push(format!(
                    "gradcheck {}: max relative error {max_err:e} above tol {tol:e}",
                    problem.name()
                ));
            }
        }
    }

    write_summary(config, &summary, Vec::new(), violations)
}
