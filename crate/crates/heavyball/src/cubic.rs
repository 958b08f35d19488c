//! The cubic-regularized subproblem
//! `min_w  ½ wᵀAw + bᵀw + (ρ/3)||w||³` with symmetric, possibly indefinite
//! `A`. A global minimizer `w_*` is characterized by `ρ||w_*|| >= γ` and
//! `(A + ρ||w_*|| I) w_* + b = 0`, where `γ = -λ_min(A)`; it is unique when
//! the first inequality is strict.
//!
//! Instance generation plants such a `w_*` by drawing it from a shaped
//! Gaussian and back-solving `b`, so every generated instance carries an
//! exact optimality certificate. Entry into the benign region
//! `ρ||w|| > γ - (ρ||w_*|| - γ)` is measured as the first-crossing time
//! `T_δ = min{t : ρ||w_{t+1}|| >= γ - δ}` and compared against the
//! closed-form bound
//! `(2 / (ηδ (1 + β/(1+ηδ)))) log(1 + γ₊² (1 + β/(1+ηδ)) / (4ρ|b⁽¹⁾|))`.

use crate::momentum::{Problem, Trace};
use crate::numkit::{dot, gauss_vec, jacobi_eigh, norm, sym_frac_power, Eigh, Rng, SymMat};
use crate::numkit::ols_slope;
use crate::{Error, Result};

/// Trace extras layout for cubic problems: `[rho_norm_w, f_gap]`.
pub const EXTRA_RHO_NORM_W: usize = 0;
pub const EXTRA_F_GAP: usize = 1;

const CUBIC_EXTRA_NAMES: &[&str] = &["rho_norm_w", "f_gap"];

/// A cubic-regularized problem instance with cached eigendecomposition and,
/// when generated, the planted global minimizer.
#[derive(Debug, Clone)]
pub struct CubicInstance {
    a: SymMat,
    b: Vec<f64>,
    rho: f64,
    w_star: Option<Vec<f64>>,
    f_star: Option<f64>,
    gamma: f64,
    eig: Eigh,
}

impl CubicInstance {
    /// Wraps raw problem data; no minimizer known.
    pub fn new(a: SymMat, b: Vec<f64>, rho: f64) -> Result<Self> {
        if rho.is_nan() || rho <= 0.0 {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
        }
        if b.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.len(),
            });
        }
        let eig = jacobi_eigh(&a)?;
        let gamma = -eig.values[0];
        Ok(CubicInstance {
            a,
            b,
            rho,
            w_star: None,
            f_star: None,
            gamma,
            eig,
        })
    }

    /// Wraps problem data with a known global minimizer, validating the
    /// characterization: `ρ||w_*|| > γ` and `||(A + ρ||w_*||I) w_* + b|| <= 1e-10`.
    pub fn with_minimizer(a: SymMat, b: Vec<f64>, rho: f64, w_star: Vec<f64>) -> Result<Self> {
        let mut inst = CubicInstance::new(a, b, rho)?;
        let nw = norm(&w_star);
        if (rho * nw).is_nan() || rho * nw <= inst.gamma {
            return Err(Error::BadMinimizer(format!(
                "rho ||w_*|| = {} must exceed gamma = {}",
                rho * nw,
                inst.gamma
            )));
        }
        let residual = {
            let mut v = inst.a.matvec(&w_star);
            for ((vi, wi), bi) in v.iter_mut().zip(&w_star).zip(&inst.b) {
                *vi += rho * nw * wi + bi;
            }
            norm(&v)
        };
        if residual > 1e-10 {
            return Err(Error::BadMinimizer(format!(
                "stationarity residual {residual:e} above 1e-10"
            )));
        }
        inst.f_star = Some(inst.objective(&w_star));
        inst.w_star = Some(w_star);
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
    pub fn a(&self) -> &SymMat {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// `γ = -λ_min(A)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn w_star(&self) -> Option<&[f64]> {
        self.w_star.as_deref()
    }
    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }
    pub fn eig(&self) -> &Eigh {
        &self.eig
    }

    /// Projection of `b` on the eigenvector of the smallest eigenvalue.
    pub fn b1(&self) -> f64 {
        dot(&self.b, &self.eig.vectors[0])
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let aw = self.a.matvec(w);
        0.5 * dot(w, &aw) + dot(&self.b, w) + self.rho / 3.0 * norm(w).powi(3)
    }

    /// `∇f(w) = Aw + b + ρ||w|| w`.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let nw = norm(w);
        let mut g = self.a.matvec(w);
        for ((gi, bi), wi) in g.iter_mut().zip(&self.b).zip(w) {
            *gi += bi + self.rho * nw * wi;
        }
        g
    }

    /// The algebraically equivalent gradient form
    /// `A_*(w - w_*) - ρ(||w_*|| - ||w||) w` available when the minimizer is
    /// known; agrees with [`Self::gradient`] to rounding.
    pub fn gradient_via_minimizer(&self, w: &[f64]) -> Option<Vec<f64>> {
        let w_star = self.w_star.as_deref()?;
        let ns = norm(w_star);
        let nw = norm(w);
        let a_star = self.a.shift_diag(self.rho * ns);
        let diff: Vec<f64> = w.iter().zip(w_star).map(|(a, b)| a - b).collect();
        let mut g = a_star.matvec(&diff);
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi -= self.rho * (ns - nw) * wi;
        }
        Some(g)
    }
}

impl Problem for CubicInstance {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn objective(&self, w: &[f64]) -> f64 {
        CubicInstance::objective(self, w)
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        CubicInstance::gradient(self, w)
    }
    fn extras(&self, w: &[f64]) -> Vec<f64> {
        let gap = self.f_star.map_or(f64::NAN, |fs| self.objective(w) - fs);
        vec![self.rho * norm(w), gap]
    }
    fn extra_names(&self) -> &'static [&'static str] {
        CUBIC_EXTRA_NAMES
    }
}

/// Parameters of the standard instance family: `A` diagonal with its two
/// lowest eigenvalues pinned to `-γ` and `-γ + gap`, trailing entries
/// uniform in `[-γ + gap, norm_a]`, and the minimizer drawn as
/// `w̃ = (A + ρ||w_*||I)^(-ξ) θ` with `θ ~ N(0, I)` and `log₂ξ ~ U[-1, 1]`,
/// rescaled to `||w_*|| = norm_wstar`; then `b = -(A + ρ||w_*||I) w_*`.
#[derive(Debug, Clone, Copy)]
pub struct InstanceParams {
    pub d: usize,
    pub rho: f64,
    pub norm_wstar: f64,
    pub norm_a: f64,
    pub gamma: f64,
    pub gap: f64,
}

impl Default for InstanceParams {
    /// The standard family: d=4, ρ = ||w_*|| = ||A||₂ = 1, γ = 0.2,
    /// gap = 5e-3.
    fn default() -> Self {
        InstanceParams {
            d: 4,
            rho: 1.0,
            norm_wstar: 1.0,
            norm_a: 1.0,
            gamma: 0.2,
            gap: 5e-3,
        }
    }
}

/// Generates an instance with a planted, certified global minimizer.
pub fn generate_instance(rng: &mut Rng, p: &InstanceParams) -> Result<CubicInstance> {
    assert!(p.gamma > 0.0 && p.gap > 0.0 && p.d >= 2);
    let mut diag = Vec::with_capacity(p.d);
    diag.push(-p.gamma);
    diag.push(-p.gamma + p.gap);
    for _ in 2..p.d {
        diag.push(rng.uniform(-p.gamma + p.gap, p.norm_a));
    }
    let a = SymMat::from_diag(&diag);

    let shifted = a.shift_diag(p.rho * p.norm_wstar);
    let theta = gauss_vec(rng, p.d, 1.0);
    let xi = 2f64.powf(rng.uniform(-1.0, 1.0));
    let shaped = sym_frac_power(&shifted, -xi)?;
    let w_tilde = shaped.matvec(&theta);
    let scale = p.norm_wstar / norm(&w_tilde);
    let w_star: Vec<f64> = w_tilde.iter().map(|v| v * scale).collect();

    let b: Vec<f64> = shifted.matvec(&w_star).iter().map(|v| -v).collect();
    CubicInstance::with_minimizer(a, b, p.rho, w_star)
}

/// Optimality certificate for a candidate minimizer.
#[derive(Debug, Clone)]
pub struct OptimalityCertificate {
    /// `ρ||w|| - γ`; the norm condition holds iff this is >= 0.
    pub norm_margin: f64,
    pub norm_condition: bool,
    /// `||(A + ρ||w||I) w + b||`.
    pub gradient_residual: f64,
    pub gradient_condition: bool,
    /// Strict inequality `ρ||w|| > γ` certifying uniqueness.
    pub unique: bool,
}

/// Evaluates both characterization conditions at `w` with residuals.
pub fn check_optimality(inst: &CubicInstance, w: &[f64]) -> OptimalityCertificate {
    let nw = norm(w);
    let norm_margin = inst.rho * nw - inst.gamma;
    let a_star = inst.a.shift_diag(inst.rho * nw);
    let mut v = a_star.matvec(w);
    for (vi, bi) in v.iter_mut().zip(&inst.b) {
        *vi += bi;
    }
    let gradient_residual = norm(&v);
    OptimalityCertificate {
        norm_margin,
        norm_condition: norm_margin >= 0.0,
        gradient_residual,
        gradient_condition: gradient_residual <= 1e-10,
        unique: norm_margin > 0.0,
    }
}

/// The benign-region predicate `ρ||w|| > γ - (ρ||w_*|| - γ)`.
/// `None` when the instance has no known minimizer.
pub fn in_benign_region(inst: &CubicInstance, w: &[f64]) -> Option<bool> {
    let w_star = inst.w_star()?;
    let slack = inst.rho * norm(w_star) - inst.gamma;
    Some(inst.rho * norm(w) > inst.gamma - slack)
}

/// Measured one-point-convexity coefficient
/// `⟨w - w_*, ∇f(w)⟩ / ||w - w_*||²` at `w`. `None` at `w == w_*` or when
/// the minimizer is unknown.
pub fn one_point_convexity_margin(inst: &CubicInstance, w: &[f64]) -> Option<f64> {
    let w_star = inst.w_star()?;
    let diff: Vec<f64> = w.iter().zip(w_star).map(|(a, b)| a - b).collect();
    let dd = dot(&diff, &diff);
    if dd == 0.0 {
        return None;
    }
    Some(dot(&diff, &inst.gradient(w)) / dd)
}

/// First-crossing time into the δ-level set, with the theoretical bound.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub delta: f64,
    /// First t with `ρ||w_{t+1}|| >= γ - δ`.
    pub t_delta_measured: Option<usize>,
    /// Closed-form bound; `None` when `|b⁽¹⁾|` is degenerately small.
    pub t_delta_bound: Option<f64>,
    /// `b⁽¹⁾ = ⟨b, v_1⟩`.
    pub b1: f64,
}

/// Evaluates the bound formula at the run's `(η, β)`.
pub fn t_delta_bound(inst: &CubicInstance, delta: f64, eta: f64, beta: f64) -> Option<f64> {
    let b1 = inst.b1();
    if b1.abs() < 1e-14 {
        return None;
    }
    let gamma_plus = inst.gamma.max(0.0);
    let amp = 1.0 + beta / (1.0 + eta * delta);
    Some(
        2.0 / (eta * delta * amp)
            * (1.0 + gamma_plus * gamma_plus * amp / (4.0 * inst.rho * b1.abs())).ln(),
    )
}

/// Scans a cubic trace for `T_δ` and pairs it with the bound.
pub fn measure_t_delta(
    trace: &Trace,
    inst: &CubicInstance,
    delta: f64,
    eta: f64,
    beta: f64,
) -> DeltaReport {
    assert!(delta > 0.0);
    let level = inst.gamma - delta;
    // T_delta = min{t : rho ||w_{t+1}|| >= gamma - delta}; records[t+1]
    // holds w_{t+1}.
    let t_delta_measured = (0..trace.len().saturating_sub(1))
        .find(|&t| trace.records[t + 1].extras[EXTRA_RHO_NORM_W] >= level);
    DeltaReport {
        delta,
        t_delta_measured,
        t_delta_bound: t_delta_bound(inst, delta, eta, beta),
        b1: inst.b1(),
    }
}

/// Linear-rate fit on the objective gap.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub nu: f64,
    /// True when the tail was non-monotone and the fit used the upper
    /// envelope (running maxima from the right) instead of every point.
    pub envelope: bool,
    pub points: usize,
}

/// Fits `f(w_t) - f(w_*) ~ C (1 - ν)^t` on the tail half of the trace.
///
/// A non-monotone tail (large-β oscillation) is fitted over its upper
/// envelope and flagged. Returns `None` when fewer than 10 positive gap
/// points are available or the minimizer is unknown.
pub fn empirical_rate_cubic(trace: &Trace, inst: &CubicInstance) -> Option<RateFit> {
    inst.w_star()?;
    let len = trace.len();
    let start = len / 2;
    // keep strictly positive gaps only; beyond f64 resolution the gap
    // collapses to 0 and carries no rate information
    let gaps: Vec<(usize, f64)> = (start..len)
        .map(|t| (t, trace.records[t].extras[EXTRA_F_GAP]))
        .filter(|(_, g)| *g > 0.0 && g.is_finite())
        .collect();
    if gaps.len() < 10 {
        return None;
    }
    let monotone = gaps.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    let fit_points: Vec<(f64, f64)> = if monotone {
        gaps.iter().map(|&(t, g)| (t as f64, g.ln())).collect()
    } else {
        // upper envelope: points that dominate everything after them
        let mut envelope = Vec::new();
        let mut running_max = f64::NEG_INFINITY;
        for &(t, g) in gaps.iter().rev() {
            if g >= running_max {
                running_max = g;
                envelope.push((t as f64, g.ln()));
            }
        }
        envelope.reverse();
        envelope
    };
    if fit_points.len() < 2 {
        return None;
    }
    let slope = ols_slope(&fit_points);
    Some(RateFit {
        nu: 1.0 - slope.exp(),
        envelope: !monotone,
        points: fit_points.len(),
    })
}
