//! Central-difference gradient checking against the analytic oracles.
//!
//! The checker only ever touches `Problem::objective`, so it stays
//! independent of the gradient code paths it validates.

use crate::momentum::Problem;
use crate::numkit::norm;

/// Central-difference gradient with step `h`.
pub fn central_diff_gradient<P: Problem>(problem: &P, w: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0);
    (0..w.len())
        .map(|j| {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[j] += h;
            wm[j] -= h;
            (problem.objective(&wp) - problem.objective(&wm)) / (2.0 * h)
        })
        .collect()
}

/// `||g_analytic - g_fd|| / ||g_analytic||` at one point (absolute error
/// when the analytic gradient is tiny).
pub fn relative_error<P: Problem>(problem: &P, w: &[f64], h: f64) -> f64 {
    let g = problem.gradient(w);
    let fd = central_diff_gradient(problem, w, h);
    let diff: f64 = g
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale = norm(&g);
    if scale > 1e-12 {
        diff / scale
    } else {
        diff
    }
}

/// Max relative error over a set of points.
pub fn max_rel_error<P: Problem>(problem: &P, points: &[Vec<f64>], h: f64) -> f64 {
    points
        .iter()
        .map(|w| relative_error(problem, w, h))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{gauss_vec, Rng};

    struct Cubed;
    impl Problem for Cubed {
        fn dim(&self) -> usize {
            2
        }
        fn objective(&self, w: &[f64]) -> f64 {
            w[0] * w[0] * w[0] + 2.0 * w[1] * w[1]
        }
        fn gradient(&self, w: &[f64]) -> Vec<f64> {
            vec![3.0 * w[0] * w[0], 4.0 * w[1]]
        }
    }

    #[test]
    fn detects_correct_and_incorrect_gradients() {
        let mut rng = Rng::new(1);
        let points: Vec<Vec<f64>> = (0..20).map(|_| gauss_vec(&mut rng, 2, 1.0)).collect();
        assert!(max_rel_error(&Cubed, &points, 1e-6) <= 1e-5);

        struct Wrong;
        impl Problem for Wrong {
            fn dim(&self) -> usize {
                2
            }
            fn objective(&self, w: &[f64]) -> f64 {
                Cubed.objective(w)
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                vec![3.0 * w[0] * w[0] + 0.5, 4.0 * w[1]]
            }
        }
        assert!(max_rel_error(&Wrong, &points, 1e-6) > 1e-2);
    }

    #[test]
    fn coarse_step_degrades_gracefully() {
        let mut rng = Rng::new(2);
        let points: Vec<Vec<f64>> = (0..20).map(|_| gauss_vec(&mut rng, 2, 1.0)).collect();
        let fine = max_rel_error(&Cubed, &points, 1e-6);
        let coarse = max_rel_error(&Cubed, &points, 0.1);
        assert!(coarse > fine, "coarse h should report a larger error");
        assert!(coarse.is_finite());
    }
}
