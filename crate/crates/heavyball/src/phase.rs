//! Phase retrieval: recover a planted unit signal from quadratic
//! measurements `y_i = (x_iᵀ w_*)²`, identifiable only up to global sign.
//!
//! Empirical objective over `n` Gaussian design vectors:
//! `f(w) = (1/4n) Σ ((x_iᵀ w)² - y_i)²`, with gradient
//! `(1/n) Σ ((x_iᵀ w)³ - (x_iᵀ w) y_i) x_i`. Its infinite-sample limit has
//! the closed form `∇F(w) = (3||w||² - 1) w - 2 (w_*ᵀ w) w_*`, whose
//! signal/perpendicular decomposition drives the staged entry-time analysis.
//!
//! Sample sums run over fixed-size chunks (see [`crate::par`]) so results are
//! identical with and without the `parallel` feature.

use crate::momentum::{Problem, Trace};
use crate::numkit::{dist2, dot, gauss_vec, norm, ols_slope, sum_norm, Rng};
use crate::par;

/// Trace extras layout for phase problems: `[w_par, norm_w_perp, dist]`.
pub const EXTRA_W_PAR: usize = 0;
pub const EXTRA_NORM_W_PERP: usize = 1;
pub const EXTRA_DIST: usize = 2;

const PHASE_EXTRA_NAMES: &[&str] = &["w_par", "norm_w_perp", "dist"];

/// A generated phase-retrieval instance with planted unit signal.
#[derive(Debug, Clone)]
pub struct PhaseInstance {
    xs: Vec<f64>, // n x d, row-major
    ys: Vec<f64>,
    w_star: Vec<f64>,
    d: usize,
    n: usize,
}

/// Draws `n` iid standard Gaussian design vectors in dimension `d`, plants
/// `w_* = e_1`, and labels `y_i = (x_iᵀ w_*)²` exactly.
pub fn sample_instance(rng: &mut Rng, d: usize, n: usize) -> PhaseInstance {
    assert!(d >= 2 && n >= 1);
    let mut xs = Vec::with_capacity(n * d);
    for _ in 0..n {
        xs.extend(gauss_vec(rng, d, 1.0));
    }
    let mut w_star = vec![0.0; d];
    w_star[0] = 1.0;
    let ys = (0..n).map(|i| xs[i * d] * xs[i * d]).collect();
    PhaseInstance {
        xs,
        ys,
        w_star,
        d,
        n,
    }
}

impl PhaseInstance {
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }
    pub fn label(&self, i: usize) -> f64 {
        self.ys[i]
    }
    pub fn design_row(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.d);
        let total = par::chunked_sum(self.n, |i| {
            let xi = self.design_row(i);
            let s = dot(xi, w);
            let r = s * s - self.ys[i];
            r * r
        });
        total / (4.0 * self.n as f64)
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.d);
        let mut g = par::chunked_vec_sum(self.n, self.d, |range, acc| {
            for i in range {
                let xi = self.design_row(i);
                let s = dot(xi, w);
                let coef = s * s * s - s * self.ys[i];
                for (a, x) in acc.iter_mut().zip(xi) {
                    *a += coef * x;
                }
            }
        });
        let inv_n = 1.0 / self.n as f64;
        g.iter_mut().for_each(|x| *x *= inv_n);
        g
    }
}

impl Problem for PhaseInstance {
    fn dim(&self) -> usize {
        self.d
    }
    fn objective(&self, w: &[f64]) -> f64 {
        PhaseInstance::objective(self, w)
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        PhaseInstance::gradient(self, w)
    }
    fn extras(&self, w: &[f64]) -> Vec<f64> {
        let dec = decompose(w, &self.w_star);
        vec![dec.w_par, norm(&dec.w_perp), dist(w, &self.w_star)]
    }
    fn extra_names(&self) -> &'static [&'static str] {
        PHASE_EXTRA_NAMES
    }
}

/// The infinite-sample counterpart of [`PhaseInstance`]: objective and
/// gradient are the exact Gaussian expectations, no samples involved.
#[derive(Debug, Clone)]
pub struct PopulationProblem {
    w_star: Vec<f64>,
}

impl PopulationProblem {
    /// `w_star` must be a unit vector.
    pub fn new(w_star: Vec<f64>) -> Self {
        debug_assert!((norm(&w_star) - 1.0).abs() < 1e-12);
        PopulationProblem { w_star }
    }
}

impl Problem for PopulationProblem {
    fn dim(&self) -> usize {
        self.w_star.len()
    }
    fn objective(&self, w: &[f64]) -> f64 {
        // E[((xᵀw)² - (xᵀw_*)²)²] / 4 for unit w_*
        let nw2 = dot(w, w);
        let c = dot(w, &self.w_star);
        (3.0 * nw2 * nw2 - 2.0 * nw2 - 4.0 * c * c + 3.0) / 4.0
    }
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        population_gradient(w, &self.w_star)
    }
    fn extras(&self, w: &[f64]) -> Vec<f64> {
        let dec = decompose(w, &self.w_star);
        vec![dec.w_par, norm(&dec.w_perp), dist(w, &self.w_star)]
    }
    fn extra_names(&self) -> &'static [&'static str] {
        PHASE_EXTRA_NAMES
    }
}

/// Closed-form population gradient `(3||w||² - 1) w - 2 (w_*ᵀ w) w_*`
/// for unit `w_*`.
pub fn population_gradient(w: &[f64], w_star: &[f64]) -> Vec<f64> {
    debug_assert!((norm(w_star) - 1.0).abs() < 1e-12);
    let a = 3.0 * dot(w, w) - 1.0;
    let b = 2.0 * dot(w_star, w);
    w.iter()
        .zip(w_star)
        .map(|(&wi, &si)| a * wi - b * si)
        .collect()
}

/// Signal projection plus the perpendicular component expressed in a basis
/// completing `w_star`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub w_par: f64,
    pub w_perp: Vec<f64>,
}

/// Splits `w` into its projection on the unit vector `w_star` and the d-1
/// coordinates orthogonal to it.
///
/// For `w_star = e_1` the perpendicular coordinates are simply entries
/// `2..d`; a general unit `w_star` is first reflected onto `e_1` by the
/// Householder map `H = I - 2uuᵀ/uᵀu`, `u = w_star - e_1`, which preserves
/// norms, so the Pythagoras identity `w_par² + ||w_perp||² = ||w||²` holds
/// either way.
pub fn decompose(w: &[f64], w_star: &[f64]) -> Decomposition {
    debug_assert_eq!(w.len(), w_star.len());
    let d = w.len();
    let mut u: Vec<f64> = w_star.to_vec();
    u[0] -= 1.0;
    let uu = dot(&u, &u);
    if uu < 1e-24 {
        // w_star is e_1 (up to rounding)
        return Decomposition {
            w_par: w[0],
            w_perp: w[1..].to_vec(),
        };
    }
    let scale = 2.0 * dot(&u, w) / uu;
    let h: Vec<f64> = (0..d).map(|i| w[i] - scale * u[i]).collect();
    Decomposition {
        w_par: h[0],
        w_perp: h[1..].to_vec(),
    }
}

/// Sign-invariant distance `min(||w - w_*||, ||w + w_*||)`.
pub fn dist(w: &[f64], w_star: &[f64]) -> f64 {
    dist2(w, w_star).min(sum_norm(w, w_star))
}

/// Draws the standard initial point `w_0 ~ N(0, I/(10000 d))`, resampling
/// (and counting) while the signal projection is degenerately small,
/// `|w_0 ∥| < 1e-8 / sqrt(d log d)`.
pub fn sample_w0(rng: &mut Rng, d: usize) -> (Vec<f64>, usize) {
    let sigma = (1.0 / (10_000.0 * d as f64)).sqrt();
    let floor = 1e-8 / ((d as f64) * (d as f64).ln()).sqrt();
    let mut resamples = 0;
    loop {
        let w0 = gauss_vec(rng, d, sigma);
        if w0[0].abs() >= floor || resamples >= 100 {
            return (w0, resamples);
        }
        resamples += 1;
    }
}

/// Coordinates with magnitude below this are skipped when solving for
/// perturbations.
pub const PERTURBATION_GUARD: f64 = 1e-12;

/// Per-iteration perturbations of the finite-sample run relative to the
/// population recursion, solved coordinate-wise from consecutive iterates.
#[derive(Debug, Clone)]
pub struct PerturbationTrace {
    /// Signal-component perturbation ξ_t (None where the divisor was tiny).
    pub xi: Vec<Option<f64>>,
    /// Perpendicular perturbations ρ_{t,j}, indexed `[t][j]`.
    pub rho: Vec<Vec<Option<f64>>>,
    /// Max |ξ|, |ρ| over `t <= horizon`.
    pub c_n_hat: f64,
    /// Count of coordinates skipped by the division guard.
    pub skipped: usize,
}

/// Solves the perturbed recursion for ξ_t and ρ_{t,j} given the iterates of
/// a constant-β run (`iterates[0] = w_0`, with `w_{-1} = w_0`).
///
/// The recursion inverted here, coordinate by coordinate:
/// `w_{t+1}∥ = (1 + 3η(1-||w_t||²) + ηξ_t) w_t∥ + β(w_t∥ - w_{t-1}∥)`, and
/// the same with `1 + η(1-3||w_t||²)` for each perpendicular coordinate.
/// `c_n_hat` aggregates only over `t <= horizon` (whole trace when `None`).
pub fn extract_perturbations(
    iterates: &[Vec<f64>],
    eta: f64,
    beta: f64,
    w_star: &[f64],
    horizon: Option<usize>,
) -> PerturbationTrace {
    assert!(iterates.len() >= 2, "need at least w_0 and w_1");
    let steps = iterates.len() - 1;
    let horizon = horizon.unwrap_or(steps - 1).min(steps - 1);

    let decs: Vec<Decomposition> = iterates.iter().map(|w| decompose(w, w_star)).collect();
    let norms2: Vec<f64> = iterates.iter().map(|w| dot(w, w)).collect();

    let mut xi = Vec::with_capacity(steps);
    let mut rho = Vec::with_capacity(steps);
    let mut c_n_hat: f64 = 0.0;
    let mut skipped = 0;

    for t in 0..steps {
        let prev = if t == 0 { &decs[0] } else { &decs[t - 1] };
        let cur = &decs[t];
        let next = &decs[t + 1];

        let coef_par = 1.0 + 3.0 * eta * (1.0 - norms2[t]);
        let xi_t = if cur.w_par.abs() < PERTURBATION_GUARD {
            skipped += 1;
            None
        } else {
            let residual = next.w_par - coef_par * cur.w_par - beta * (cur.w_par - prev.w_par);
            Some(residual / (eta * cur.w_par))
        };
        if t <= horizon {
            if let Some(v) = xi_t {
                c_n_hat = c_n_hat.max(v.abs());
            }
        }
        xi.push(xi_t);

        let coef_perp = 1.0 + eta * (1.0 - 3.0 * norms2[t]);
        let mut rho_t = Vec::with_capacity(cur.w_perp.len());
        for j in 0..cur.w_perp.len() {
            let r = if cur.w_perp[j].abs() < PERTURBATION_GUARD {
                skipped += 1;
                None
            } else {
                let residual = next.w_perp[j]
                    - coef_perp * cur.w_perp[j]
                    - beta * (cur.w_perp[j] - prev.w_perp[j]);
                Some(residual / (eta * cur.w_perp[j]))
            };
            if t <= horizon {
                if let Some(v) = r {
                    c_n_hat = c_n_hat.max(v.abs());
                }
            }
            rho_t.push(r);
        }
        rho.push(rho_t);
    }

    PerturbationTrace {
        xi,
        rho,
        c_n_hat,
        skipped,
    }
}

/// Measured stage-crossing iterations paired with the theoretical
/// entry-time reference.
#[derive(Debug, Clone)]
pub struct StageReport {
    /// First t with `|w_t∥| > sqrt((2 + c_n)/3)`.
    pub t0: Option<usize>,
    /// First t >= T0 with `||w_t⊥|| <= ζ/2`.
    pub tb: Option<usize>,
    /// First t >= Tb with `||w_t∥| - 1| <= ζ/2`.
    pub ta: Option<usize>,
    /// First t meeting both entry conditions.
    pub t_zeta: Option<usize>,
    pub zeta: f64,
    /// Max `||m_t||` over `t <= T_ζ` (whole trace when entry never happens).
    pub c_m_hat: f64,
    /// Entry-time reference value `log d / (η (1 + c_η β))`.
    pub theory_t_zeta: f64,
}

/// Scans a phase trace for the stage-crossing iterations.
///
/// `c_n_hat` feeds the stage-one threshold `sqrt((2 + c_n)/3)`; pass the
/// measured value from [`extract_perturbations`] of the same run.
pub fn stage_report(
    trace: &Trace,
    zeta: f64,
    c_n_hat: f64,
    eta: f64,
    beta: f64,
    d: usize,
) -> StageReport {
    let threshold0 = ((2.0 + c_n_hat) / 3.0).sqrt();
    let half = zeta / 2.0;

    let w_par = |t: usize| trace.records[t].extras[EXTRA_W_PAR];
    let w_perp = |t: usize| trace.records[t].extras[EXTRA_NORM_W_PERP];
    let len = trace.len();

    let t0 = (0..len).find(|&t| w_par(t).abs() > threshold0);
    let tb = t0.and_then(|start| (start..len).find(|&t| w_perp(t) <= half));
    let ta = tb.and_then(|start| (start..len).find(|&t| (w_par(t).abs() - 1.0).abs() <= half));
    let t_zeta =
        (0..len).find(|&t| (w_par(t).abs() - 1.0).abs() <= half && w_perp(t) <= half);

    let m_horizon = t_zeta.unwrap_or(len - 1);
    let c_m_hat = trace.records[..=m_horizon]
        .iter()
        .map(|r| r.norm_m)
        .fold(0.0, f64::max);

    StageReport {
        t0,
        tb,
        ta,
        t_zeta,
        zeta,
        c_m_hat,
        theory_t_zeta: entry_time_reference(eta, beta, d),
    }
}

/// Entry-time reference curve `log d / (η (1 + c_η β))` with
/// `c_η = 1/(1 + η/2)`.
///
/// This is a reference up to an unstated constant, never asserted as a
/// bound; only its β-monotonicity is load-bearing.
pub fn entry_time_reference(eta: f64, beta: f64, d: usize) -> f64 {
    let c_eta = 1.0 / (1.0 + eta / 2.0);
    (d as f64).ln() / (eta * (1.0 + c_eta * beta))
}

/// Fits `dist(w_t, w_*) ~ C (1 - ν)^(t - T_ζ)` on the post-entry window by
/// ordinary least squares in log space; returns `ν̂`.
///
/// The window runs from `t_zeta` to the first t with `dist < 1e-12` (or the
/// trace end) and must contain at least 20 iterations past `t_zeta`,
/// otherwise `None`.
pub fn empirical_linear_rate(trace: &Trace, t_zeta: usize) -> Option<f64> {
    let len = trace.len();
    if t_zeta >= len {
        return None;
    }
    let mut end = len;
    for t in t_zeta..len {
        if trace.records[t].extras[EXTRA_DIST] < 1e-12 {
            end = t;
            break;
        }
    }
    if end <= t_zeta + 20 {
        return None;
    }
    let xy: Vec<(f64, f64)> = (t_zeta..end)
        .map(|t| (t as f64, trace.records[t].extras[EXTRA_DIST].ln()))
        .collect();
    let slope = ols_slope(&xy);
    Some(1.0 - slope.exp())
}
