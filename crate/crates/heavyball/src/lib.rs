//! Heavy Ball (Polyak) momentum gradient descent, together with the two
//! non-convex case studies where the momentum provably speeds up entry into
//! a benign region: phase retrieval and the cubic-regularized subproblem.
//!
//! The crate is organized around desk-scale, fully deterministic experiments:
//!
//! * [`numkit`] — minimal dense linear algebra (cyclic Jacobi eigensolver,
//!   symmetric fractional matrix powers) and a portable counter-based RNG.
//! * [`momentum`] — the Heavy Ball iteration in both equivalent forms
//!   (previous-iterate and gradient-accumulator), β-schedules including the
//!   switch-with-reset variant, and the generic trace-producing run loop.
//! * [`phase`] — phase retrieval: instances, empirical and population
//!   gradients, signal/perpendicular decomposition, perturbation extraction,
//!   and stage / entry-time measurement.
//! * [`cubic`] — the cubic-regularized subproblem: instance generation with a
//!   planted minimizer, optimality and benign-region certificates, and
//!   entry-time measurement against the closed-form bound.
//! * [`dynamics`] — executable verification of the scalar momentum
//!   recursions (growth, decay, growth-plus-one) that drive both analyses.
//! * [`experiments`] — auxiliary dynamics: top-eigenvector computation via
//!   Heavy Ball and a 2-D strict-saddle escape problem.
//! * [`harness`] — experiment orchestration, CSV/summary serialization and
//!   gradient checking; the CLI in `heavyball-cli` is a thin wrapper over it.
//!
//! With the default `parallel` feature, sample sums and sweeps run on rayon
//! with deterministic (fixed-order) reductions, so output bytes do not depend
//! on the thread count or on the feature being enabled.

pub mod cubic;
pub mod dynamics;
pub mod experiments;
pub mod harness;
pub mod momentum;
pub mod numkit;
pub mod par;
pub mod phase;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
