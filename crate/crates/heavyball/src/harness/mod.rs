//! Experiment orchestration, serialization and gradient-check tooling.

mod config;
mod csvio;
mod gradcheck;
mod runner;

pub use config::{BetaSpec, Experiment, ExperimentConfig, GradCheckProblem, OUT_DIR_ENV};
pub use csvio::{fmt_g17, write_cubic_csv, write_eig_csv, write_phase_csv, write_saddle_csv};
pub use gradcheck::{central_diff_gradient, max_rel_error, relative_error};
pub use runner::{run_experiment, ExperimentOutput};
