//! Auxiliary momentum dynamics: top-eigenvector computation by the
//! unnormalized Heavy Ball recursion, and escape from a 2-D strict saddle.
//!
//! Eigenvector runs iterate `w_{t+1} = (I + ηA) w_t + β (w_t - w_{t-1})`
//! and track the sign-invariant distance of the normalized iterate to the
//! top eigenvector. Projections on each eigenvector follow the scalar
//! growth recursion with rate `1 + ηλ_i`, so the top projection wins and a
//! larger β widens its lead.
//!
//! The saddle problem is `f(w) = ½ wᵀHw + x̄ᵀw + ||w||₁₀¹⁰` with
//! `H = diag(1, -0.1)`: near the origin the gradient is small but the
//! second coordinate sees negative curvature, making `e_2` the escape
//! direction.

use crate::momentum::{self, HBConfig, HbForm, Problem, Trace};
use crate::numkit::{dot, jacobi_eigh, norm, Rng, SymMat};
use crate::{Error, Result};

/// Trace extras layout for saddle runs: the two coordinates.
pub const EXTRA_W1: usize = 0;
pub const EXTRA_W2: usize = 1;

const SADDLE_EXTRA_NAMES: &[&str] = &["w1", "w2"];

/// The fixed 2-D strict-saddle objective with sampled linear term.
#[derive(Debug, Clone)]
pub struct SaddleInstance {
    xs: Vec<[f64; 2]>,
    x_bar: [f64; 2],
}

/// Draws `n` samples `x_i ~ N(0, diag(0.1, 0.001))`; the tiny variance in
/// the second coordinate keeps the gradient component along the escape
/// direction small.
pub fn sample_saddle(rng: &mut Rng, n: usize) -> SaddleInstance {
    assert!(n >= 1);
    let s0 = 0.1f64.sqrt();
    let s1 = 0.001f64.sqrt();
    let xs: Vec<[f64; 2]> = (0..n)
        .map(|_| [s0 * rng.next_gauss(), s1 * rng.next_gauss()])
        .collect();
    let mut x_bar = [0.0, 0.0];
    for x in &xs {
        x_bar[0] += x[0];
        x_bar[1] += x[1];
    }
    x_bar[0] /= n as f64;
    x_bar[1] /= n as f64;
    SaddleInstance { xs, x_bar }
}

impl SaddleInstance {
    pub fn n(&self) -> usize {
        self.xs.len()
    }
    pub fn x_bar(&self) -> [f64; 2] {
        self.x_bar
    }
    pub fn samples(&self) -> &[[f64; 2]] {
        &self.xs
    }

    /// `H = diag(1, -0.1)`, fixed.
    pub fn h() -> [f64; 2] {
        [1.0, -0.1]
    }
}

impl Problem for SaddleInstance {
    fn dim(&self) -> usize {
        2
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let h = Self::h();
        0.5 * (h[0] * w[0] * w[0] + h[1] * w[1] * w[1])
            + self.x_bar[0] * w[0]
            + self.x_bar[1] * w[1]
            + w[0].abs().powi(10)
            + w[1].abs().powi(10)
    }

    /// `∇f(w) = Hw + x̄ + 10 |w|⁸ ∘ w`.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let h = Self::h();
        (0..2)
            .map(|i| h[i] * w[i] + self.x_bar[i] + 10.0 * w[i].abs().powi(8) * w[i])
            .collect()
    }

    fn extras(&self, w: &[f64]) -> Vec<f64> {
        vec![w[0], w[1]]
    }
    fn extra_names(&self) -> &'static [&'static str] {
        SADDLE_EXTRA_NAMES
    }
}

/// Residuals of the stationarity equations at `w`:
/// `(1 + 10|w₁|⁸) w₁ + x̄₁` and `(-0.1 + 10|w₂|⁸) w₂ + x̄₂`.
pub fn saddle_stationarity_residuals(inst: &SaddleInstance, w: &[f64]) -> [f64; 2] {
    let xb = inst.x_bar();
    [
        (1.0 + 10.0 * w[0].abs().powi(8)) * w[0] + xb[0],
        (-0.1 + 10.0 * w[1].abs().powi(8)) * w[1] + xb[1],
    ]
}

/// Heavy Ball run on the saddle objective started at the origin.
pub fn saddle_escape_run(inst: &SaddleInstance, config: &HBConfig, cap: usize) -> Trace {
    momentum::run(inst, &[0.0, 0.0], config, HbForm::Iterate, cap, &momentum::no_stop)
}

/// First t with `f(w_t) <= f(0) - drop`.
pub fn first_passage(trace: &Trace, drop: f64) -> Option<usize> {
    let f0 = trace.records[0].f;
    trace.records.iter().find(|r| r.f <= f0 - drop).map(|r| r.t)
}

/// Iterates rescale once their norm passes this; the recursion is
/// homogeneous, so scaling `(w_t, w_{t-1})` jointly leaves directions and
/// normalized distances unchanged.
pub const EIG_RESCALE_AT: f64 = 1e100;

/// Result of an eigenvector run.
#[derive(Debug, Clone)]
pub struct EigRun {
    /// Sign-invariant distance of the normalized iterate to the top
    /// eigenvector, per iteration (length = steps + 1).
    pub dists: Vec<f64>,
    /// Raw (internally rescaled) iterates, `w_0, …, w_T`.
    pub iterates: Vec<Vec<f64>>,
    /// Number of joint rescales applied.
    pub rescales: usize,
    /// The top eigenvector used as the reference.
    pub top: Vec<f64>,
}

/// Runs `w_{t+1} = (I + ηA) w_t + β (w_t - w_{t-1})` from `w0` and tracks
/// the normalized distance to the top eigenvector of PSD `A`.
///
/// Fails when `w0` is numerically orthogonal to the top eigenvector (the
/// caller should resample its start vector).
pub fn eig_hb_run(
    a: &SymMat,
    eta: f64,
    beta: f64,
    w0: &[f64],
    cap: usize,
) -> Result<EigRun> {
    let eig = jacobi_eigh(a)?;
    let top = eig.vectors.last().expect("non-empty matrix").clone();
    let n0 = norm(w0);
    let overlap = (dot(w0, &top) / n0).abs();
    if overlap < 1e-12 {
        return Err(Error::OrthogonalStart { overlap });
    }

    let normalized_dist = |w: &[f64]| {
        let nw = norm(w);
        let mut dm = 0.0;
        let mut dp = 0.0;
        for (wi, ui) in w.iter().zip(&top) {
            let h = wi / nw;
            dm += (h - ui) * (h - ui);
            dp += (h + ui) * (h + ui);
        }
        dm.sqrt().min(dp.sqrt())
    };

    let mut w = w0.to_vec();
    let mut w_prev = w0.to_vec();
    let mut dists = Vec::with_capacity(cap + 1);
    let mut iterates = Vec::with_capacity(cap + 1);
    let mut rescales = 0;
    dists.push(normalized_dist(&w));
    iterates.push(w.clone());

    for _ in 0..cap {
        let aw = a.matvec(&w);
        let next: Vec<f64> = (0..w.len())
            .map(|i| w[i] + eta * aw[i] + beta * (w[i] - w_prev[i]))
            .collect();
        w_prev = w;
        w = next;

        let nw = norm(&w);
        if nw > EIG_RESCALE_AT {
            let inv = 1.0 / nw;
            w.iter_mut().for_each(|v| *v *= inv);
            w_prev.iter_mut().for_each(|v| *v *= inv);
            rescales += 1;
        }
        dists.push(normalized_dist(&w));
        iterates.push(w.clone());
    }

    Ok(EigRun {
        dists,
        iterates,
        rescales,
        top,
    })
}

/// First t with `dists[t] <= tol`.
pub fn iterations_to_distance(run: &EigRun, tol: f64) -> Option<usize> {
    run.dists.iter().position(|&d| d <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::RunOutcome;
    use crate::numkit::gauss_vec;

    #[test]
    fn sample_covariance_close_to_nominal() {
        let inst = sample_saddle(&mut Rng::new(5), 100_000);
        let n = inst.n() as f64;
        for (j, want) in [(0usize, 0.1f64), (1, 0.001)] {
            let mean: f64 = inst.samples().iter().map(|x| x[j]).sum::<f64>() / n;
            let var: f64 = inst
                .samples()
                .iter()
                .map(|x| (x[j] - mean) * (x[j] - mean))
                .sum::<f64>()
                / n;
            assert!(
                (var - want).abs() <= 0.1 * want,
                "coordinate {j} variance {var} not within 10% of {want}"
            );
        }
    }

    #[test]
    fn mean_is_cached_exactly() {
        let inst = sample_saddle(&mut Rng::new(6), 10);
        let mut mean = [0.0, 0.0];
        for x in inst.samples() {
            mean[0] += x[0];
            mean[1] += x[1];
        }
        mean[0] /= 10.0;
        mean[1] /= 10.0;
        assert_eq!(inst.x_bar(), mean);
    }

    #[test]
    fn gradient_at_origin_is_mean_and_objective_zero() {
        let inst = sample_saddle(&mut Rng::new(7), 10);
        assert_eq!(inst.objective(&[0.0, 0.0]), 0.0);
        let g = inst.gradient(&[0.0, 0.0]);
        assert_eq!(g, inst.x_bar().to_vec());
    }

    #[test]
    fn saddle_gradient_matches_finite_differences() {
        let inst = sample_saddle(&mut Rng::new(8), 10);
        let mut rng = Rng::new(9);
        let h = 1e-6;
        for _ in 0..50 {
            let w = gauss_vec(&mut rng, 2, 0.5);
            let g = inst.gradient(&w);
            for j in 0..2 {
                let mut wp = w.to_vec();
                let mut wm = w.to_vec();
                wp[j] += h;
                wm[j] -= h;
                let fd = (inst.objective(&wp) - inst.objective(&wm)) / (2.0 * h);
                assert!(
                    (fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0),
                    "fd mismatch at {j}: {fd} vs {}",
                    g[j]
                );
            }
        }
    }

    #[test]
    fn ell10_gradient_positive_on_positive_orthant() {
        let w = [0.3f64, 1.7];
        for wi in w {
            assert!(10.0 * wi.abs().powi(8) * wi > 0.0);
        }
    }

    #[test]
    fn first_step_is_minus_eta_mean() {
        let inst = sample_saddle(&mut Rng::new(10), 10);
        let config = HBConfig::constant(0.1, 0.9).unwrap();
        let (_, iterates) = momentum::run_recorded(
            &inst,
            &[0.0, 0.0],
            &config,
            HbForm::Iterate,
            1,
            &momentum::no_stop,
        );
        let xb = inst.x_bar();
        assert_eq!(iterates[1], vec![-0.1 * xb[0], -0.1 * xb[1]]);
    }

    #[test]
    fn escape_faster_with_momentum_and_sign_persists() {
        let inst = sample_saddle(&mut Rng::new(11), 10);
        let escape_sign = -inst.x_bar()[1].signum();
        let mut passages = Vec::new();
        for &beta in &[0.0, 0.5, 0.9] {
            let config = HBConfig::constant(0.1, beta).unwrap();
            let trace = saddle_escape_run(&inst, &config, 5000);
            assert_eq!(trace.outcome, RunOutcome::Completed);
            let t = first_passage(&trace, 0.01).expect("escape should happen");
            // the escape coordinate keeps the sign of -x_bar[1] throughout
            // the escape phase
            for r in &trace.records[1..=t] {
                let w2 = r.extras[EXTRA_W2];
                if w2 != 0.0 {
                    assert_eq!(w2.signum(), escape_sign, "sign flip at t={}", r.t);
                }
            }
            passages.push(t);
        }
        assert!(
            passages[0] > passages[1] && passages[1] > passages[2],
            "first-passage times should decrease with beta: {passages:?}"
        );
    }

    #[test]
    fn long_run_lands_on_a_stationary_point() {
        let inst = sample_saddle(&mut Rng::new(12), 10);
        let config = HBConfig::constant(0.1, 0.5).unwrap();
        let trace = saddle_escape_run(&inst, &config, 20_000);
        assert_eq!(trace.outcome, RunOutcome::Completed);
        let last = trace.last();
        let w = [last.extras[EXTRA_W1], last.extras[EXTRA_W2]];
        let res = saddle_stationarity_residuals(&inst, &w);
        assert!(
            res[0].abs() <= 1e-6 && res[1].abs() <= 1e-6,
            "stationarity residuals too large: {res:?}"
        );
    }

    #[test]
    fn eig_diag_converges_to_dominant_direction() {
        let a = SymMat::from_diag(&[2.0, 1.0]);
        let run = eig_hb_run(&a, 0.1, 0.0, &[0.6, 0.8], 400).unwrap();
        assert_eq!(run.top, vec![1.0, 0.0]);
        assert!(run.dists.last().unwrap() < &1e-6);
        // distance shrinks overall
        assert!(run.dists[0] > run.dists[100]);
    }

    #[test]
    fn eig_orthogonal_start_rejected() {
        let a = SymMat::from_diag(&[2.0, 1.0]);
        match eig_hb_run(&a, 0.1, 0.0, &[0.0, 1.0], 10) {
            Err(Error::OrthogonalStart { .. }) => {}
            other => panic!("expected orthogonal-start error, got {other:?}"),
        }
    }

    #[test]
    fn eig_projection_recursion_identity() {
        // <w_{t+1}, u_i> = (1 + eta lambda_i) <w_t, u_i> + beta (<w_t,u_i> - <w_{t-1},u_i>)
        let mut rng = Rng::new(13);
        let b_rows: Vec<Vec<f64>> = (0..6).map(|_| gauss_vec(&mut rng, 6, 1.0)).collect();
        let a = SymMat::gram(&b_rows);
        let eig = jacobi_eigh(&a).unwrap();
        let w0 = gauss_vec(&mut rng, 6, 1.0);
        let run = eig_hb_run(&a, 0.01, 0.7, &w0, 200).unwrap();
        assert_eq!(run.rescales, 0, "short run must not rescale");
        for t in 1..run.iterates.len() - 1 {
            for (i, u) in eig.vectors.iter().enumerate() {
                let prev = dot(&run.iterates[t - 1], u);
                let cur = dot(&run.iterates[t], u);
                let next = dot(&run.iterates[t + 1], u);
                let want = (1.0 + 0.01 * eig.values[i]) * cur + 0.7 * (cur - prev);
                let scale = norm(&run.iterates[t + 1]).max(1.0);
                assert!(
                    (next - want).abs() <= 1e-10 * scale,
                    "projection identity failed at t={t}, i={i}"
                );
            }
        }
    }

    #[test]
    fn eig_rescaling_preserves_distances() {
        let a = SymMat::from_diag(&[30.0, 1.0]);
        // large eta and many steps to force rescales
        let run = eig_hb_run(&a, 1.0, 0.5, &[1.0, 1.0], 50_000).unwrap();
        assert!(run.rescales > 0, "run should have rescaled");
        assert!(run.dists.iter().all(|d| d.is_finite()));
        assert!(run.dists.last().unwrap() < &1e-10);
    }

    #[test]
    fn eig_momentum_reaches_threshold_sooner() {
        let mut rng = Rng::new(14);
        let b_rows: Vec<Vec<f64>> = (0..10).map(|_| gauss_vec(&mut rng, 10, 1.0)).collect();
        let a = SymMat::gram(&b_rows);
        let w0 = gauss_vec(&mut rng, 10, 1.0);
        // small eta, where the momentum gap is widest
        let mut iters = Vec::new();
        for &beta in &[0.0, 0.5, 0.9] {
            let run = eig_hb_run(&a, 1e-3, beta, &w0, 100_000).unwrap();
            iters.push(iterations_to_distance(&run, 1e-3).expect("should converge"));
        }
        assert!(
            iters[0] > iters[1] && iters[1] > iters[2],
            "iterations should decrease with beta: {iters:?}"
        );
    }
}
