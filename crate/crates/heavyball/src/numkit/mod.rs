//! Minimal dense linear algebra and deterministic random sampling.

mod mat;
mod rng;

pub use mat::{dist2, dot, inf_dist, jacobi_eigh, norm, ols_slope, sum_norm, sym_frac_power, Eigh, SymMat};
pub use rng::{derive_seed, gauss_vec, Rng};
