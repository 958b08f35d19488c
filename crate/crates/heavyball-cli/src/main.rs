//! Experiment runner for the heavyball library.
//!
//! Each subcommand reproduces one experiment family deterministically:
//! identical invocations write byte-identical CSVs. Configuration comes
//! from built-in defaults, overridden by an optional flat `key=value`
//! config file (`--config`), overridden by command-line flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heavyball::harness::{run_experiment, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "heavyball")]
#[command(about = "Heavy Ball momentum experiments: deterministic traces and reports")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase retrieval β-sweep with stage and entry-time reports
    Phase(RunArgs),
    /// Cubic-regularized subproblem β-sweep with entry-time bound checks
    Cubic(RunArgs),
    /// Strict-saddle escape first-passage sweep
    Saddle(RunArgs),
    /// Top-eigenvector computation over an (η, β) grid
    Eig(RunArgs),
    /// Momentum-recursion verification sweeps
    Lemmas(RunArgs),
    /// Central-difference check of the analytic gradients
    Gradcheck(RunArgs),
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Phase(_) => Experiment::Phase,
            Command::Cubic(_) => Experiment::Cubic,
            Command::Saddle(_) => Experiment::Saddle,
            Command::Eig(_) => Experiment::Eig,
            Command::Lemmas(_) => Experiment::Lemmas,
            Command::Gradcheck(_) => Experiment::GradCheck,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Phase(a)
            | Command::Cubic(a)
            | Command::Saddle(a)
            | Command::Eig(a)
            | Command::Lemmas(a)
            | Command::Gradcheck(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Master seed; every random stream is derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Step size η
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated β list; entries are floats or `switch[:lo[:thresh]]`
    #[arg(long)]
    beta: Option<String>,
    /// Iteration cap per run
    #[arg(long = "T")]
    t_max: Option<usize>,
    /// Benign-region radius (phase)
    #[arg(long)]
    zeta: Option<f64>,
    /// Entry margin (cubic)
    #[arg(long)]
    delta: Option<f64>,
    /// Output directory (default: $HEAVYBALL_OUT or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file applied before other flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem dimension
    #[arg(long)]
    d: Option<usize>,
    /// Sample count
    #[arg(long)]
    n: Option<usize>,
    /// Sweep size per recursion mode (lemmas)
    #[arg(long)]
    trials: Option<usize>,
    /// Random points per problem (gradcheck)
    #[arg(long)]
    count: Option<usize>,
    /// Central-difference step (gradcheck)
    #[arg(long)]
    h: Option<f64>,
    /// Fail gradcheck above this max relative error (informational if unset)
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated η grid (eig)
    #[arg(long)]
    etas: Option<String>,
    /// Comma-separated problem list (gradcheck): phase,cubic,saddle
    #[arg(long)]
    problems: Option<String>,
    /// Nudge b with Gaussian noise when its bottom-eigenvector projection
    /// is degenerate (cubic)
    #[arg(long)]
    perturb_b: bool,
}

fn build_config(command: &Command) -> heavyball::Result<ExperimentConfig> {
    let args = command.args();
    let mut config = ExperimentConfig::defaults(command.experiment());

    if let Some(path) = &args.config {
        let contents = std::fs::read_to_string(path)?;
        config.apply_file(&contents)?;
        // the subcommand, not the file, decides the experiment
        config.experiment = command.experiment();
    }

    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(eta) = args.eta {
        config.eta = eta;
    }
    if let Some(beta) = &args.beta {
        config.apply_kv("beta", beta)?;
    }
    if let Some(t) = args.t_max {
        config.t_max = t;
    }
    if let Some(zeta) = args.zeta {
        config.zeta = zeta;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(count) = args.count {
        config.count = count;
    }
    if let Some(h) = args.h {
        config.h = h;
    }
    if let Some(tol) = args.tol {
        config.tol = Some(tol);
    }
    if let Some(etas) = &args.etas {
        config.apply_kv("etas", etas)?;
    }
    if let Some(problems) = &args.problems {
        config.apply_kv("problems", problems)?;
    }
    if args.perturb_b {
        config.perturb_b = true;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&config) {
        Ok(output) => {
            print!("{}", output.summary);
            for file in &output.files {
                eprintln!("wrote {}", file.display());
            }
            eprintln!("wrote {}", output.summary_path.display());
            if output.ok() {
                ExitCode::SUCCESS
            } else {
                for v in &output.violations {
                    eprintln!("violation: {v}");
                }
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
