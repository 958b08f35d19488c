use thiserror::Error;

/// Errors surfaced by the numerical kernels and the run loop.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The cyclic Jacobi sweep cap was hit before the off-diagonal norm
    /// dropped below threshold.
    #[error("jacobi eigensolver did not converge: off-diagonal norm {off_norm:e} after {sweeps} sweeps (threshold {threshold:e})")]
    JacobiNoConvergence {
        off_norm: f64,
        threshold: f64,
        sweeps: usize,
    },

    /// A fractional matrix power was requested for a matrix that is not
    /// positive definite.
    #[error("matrix is not positive definite: smallest eigenvalue {lambda_min:e}")]
    NotPositiveDefinite { lambda_min: f64 },

    /// A gradient with NaN/Inf entries reached the iteration.
    #[error("non-finite gradient at iteration {t}")]
    NonFiniteGradient { t: usize },

    /// The iterate norm blew past the divergence guard.
    #[error("iterate diverged at iteration {t}: ||w|| = {norm:e}")]
    Diverged { t: usize, norm: f64 },

    /// A dimension mismatch between an iterate/gradient and the problem.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A decay-mode recursion was requested outside its admissible range.
    #[error("decay precondition violated: (1 + beta/(1-theta)) * theta = {value} >= 1")]
    DecayPrecondition { value: f64 },

    /// Starting vector is (numerically) orthogonal to the dominant
    /// eigenvector; the caller should resample.
    #[error("start vector is orthogonal to the dominant eigenvector (|<w0,u1>| = {overlap:e}); resample")]
    OrthogonalStart { overlap: f64 },

    /// A planted minimizer failed its certificate at construction.
    #[error("planted minimizer rejected: {0}")]
    BadMinimizer(String),

    /// Filesystem failure while writing experiment output.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
