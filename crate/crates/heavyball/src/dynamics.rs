//! Executable verification of the scalar momentum recursions.
//!
//! Three recursion families drive the case-study analyses, each simulated
//! with equality and then checked against its effective per-step rate:
//!
//! * growth:          `a_{t+1} = (1 + θ) a_t + β (a_t - a_{t-1})`
//!   effective rate   `a_{t+1} >= (1 + (1 + β/(1+θ)) θ) a_t`
//! * decay:           `b_{t+1} = (1 - θ) b_t + β (b_t - b_{t-1})`
//!   effective rate   `b_{t+1} <= (1 - (1 + β/(1-θ)) θ) b_t`,
//!   admissible only when `(1 + β/(1-θ)) θ < 1`
//! * growth-plus-one: `a_{t+1} = (1 + θ) a_t + 1 + β (a_t - a_{t-1})`
//!   effective rate   `a_{t+1} >= (1 + θ + θβ/(1+θ)) a_t + 1`, with the
//!   closed-form floor `a_t >= ((1+ρ_β)^t - 1)/ρ_β`, `ρ_β = θ(1 + β/(1+θ))`
//!
//! Mirrored (non-positive) sequences flip every inequality. Rates are
//! checked with a relative slack of 1e-12 so rounding alone never counts
//! as a violation.

use crate::{Error, Result};

/// Relative slack absorbing floating-point rounding in the rate checks.
pub const VERIFY_SLACK: f64 = 1e-12;

/// Simulation aborts once |a_t| exceeds this.
pub const OVERFLOW_GUARD: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecursionMode {
    Growth,
    Decay,
    GrowthPlusOne,
}

/// A scalar momentum recursion instance.
#[derive(Debug, Clone, Copy)]
pub struct RecursionSpec {
    pub theta: f64,
    pub beta: f64,
    pub mode: RecursionMode,
    pub a0: f64,
    pub a_minus1: f64,
}

impl RecursionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta.is_nan() || self.theta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "theta must be > 0, got {}",
                self.theta
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!(
                "beta must be in [0, 1], got {}",
                self.beta
            )));
        }
        match self.mode {
            RecursionMode::Growth => {
                let ok_pos = self.a0 >= self.a_minus1 && self.a_minus1 > 0.0;
                let ok_neg = self.a0 <= self.a_minus1 && self.a_minus1 < 0.0;
                if !(ok_pos || ok_neg) {
                    return Err(Error::InvalidConfig(
                        "growth mode needs a0 >= a_{-1} > 0 or the non-positive mirror".into(),
                    ));
                }
            }
            RecursionMode::Decay => {
                let factor = (1.0 + self.beta / (1.0 - self.theta)) * self.theta;
                if self.theta >= 1.0 || factor >= 1.0 {
                    return Err(Error::DecayPrecondition { value: factor });
                }
                let ok_pos = self.a0 <= self.a_minus1 && self.a0 >= 0.0;
                let ok_neg = self.a0 >= self.a_minus1 && self.a0 <= 0.0;
                if !(ok_pos || ok_neg) {
                    return Err(Error::InvalidConfig(
                        "decay mode needs a0 <= a_{-1}, a0 >= 0, or the non-positive mirror".into(),
                    ));
                }
            }
            RecursionMode::GrowthPlusOne => {
                if self.a0 != self.a_minus1 || self.a0 < 0.0 {
                    return Err(Error::InvalidConfig(
                        "growth-plus-one mode needs a0 == a_{-1} >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Simulates the recursion with equality for `T` steps.
///
/// Returns `[a_{-1}, a_0, a_1, …, a_T]` (length `T + 2`), truncated early if
/// a value exceeds the overflow guard.
pub fn simulate(spec: &RecursionSpec, t_steps: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut seq = Vec::with_capacity(t_steps + 2);
    seq.push(spec.a_minus1);
    seq.push(spec.a0);
    for _ in 0..t_steps {
        let n = seq.len();
        let (prev, cur) = (seq[n - 2], seq[n - 1]);
        let next = match spec.mode {
            RecursionMode::Growth => (1.0 + spec.theta) * cur + spec.beta * (cur - prev),
            RecursionMode::Decay => (1.0 - spec.theta) * cur + spec.beta * (cur - prev),
            RecursionMode::GrowthPlusOne => {
                (1.0 + spec.theta) * cur + 1.0 + spec.beta * (cur - prev)
            }
        };
        if next.abs() > OVERFLOW_GUARD {
            break;
        }
        seq.push(next);
    }
    Ok(seq)
}

/// Outcome of a per-step rate check.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    /// Index `t` (in recursion time, so `a_t` vs `a_{t+1}`) of the first
    /// violated step, if any.
    pub first_violation: Option<usize>,
    /// Number of steps checked.
    pub checked: usize,
}

impl ViolationReport {
    pub fn ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// `seq[i]` holds `a_{i-1}`; the conclusion is checked at recursion indices
/// t >= 1, i.e. on pairs `(a_t, a_{t+1})` = `(seq[t+1], seq[t+2])`.
///
/// The hypotheses cover sign-constant sequences only. An equality-simulated
/// decay sequence with large β oscillates and eventually crosses zero; past
/// that point no conclusion is claimed, so checking stops at the first
/// element whose sign opposes the initial one.
fn check_rate(seq: &[f64], rate: f64, lower_bound_for_positive: bool) -> ViolationReport {
    let s_ref = if seq[1] != 0.0 {
        seq[1].signum()
    } else {
        seq[0].signum()
    };
    let positive_regime = s_ref >= 0.0;
    let left_regime = |v: f64| {
        if positive_regime {
            v < 0.0
        } else {
            v > 0.0
        }
    };

    // pairs (seq[i], seq[i+1]) for i >= 2 are (a_t, a_{t+1}) with t >= 1
    let mut checked = 0;
    let mut first_violation = None;
    for i in 2..seq.len().saturating_sub(1) {
        let cur = seq[i];
        let next = seq[i + 1];
        if left_regime(cur) || left_regime(next) {
            break;
        }
        let target = rate * cur;
        let slack = VERIFY_SLACK * target.abs().max(cur.abs());
        let holds = if positive_regime == lower_bound_for_positive {
            next >= target - slack
        } else {
            next <= target + slack
        };
        checked += 1;
        if !holds {
            first_violation = Some(i - 1);
            break;
        }
    }
    ViolationReport {
        first_violation,
        checked,
    }
}

/// Checks the growth conclusion `a_{t+1} >= (1 + (1 + β/(1+θ)) θ) a_t`
/// (mirrored for non-positive sequences) at every t >= 1.
pub fn verify_growth(seq: &[f64], theta: f64, beta: f64) -> ViolationReport {
    let rate = 1.0 + (1.0 + beta / (1.0 + theta)) * theta;
    check_rate(seq, rate, true)
}

/// Checks the decay conclusion `b_{t+1} <= (1 - (1 + β/(1-θ)) θ) b_t`
/// (mirrored for non-positive sequences) at every t >= 1.
///
/// Rejects inadmissible `(θ, β)` with a diagnostic.
pub fn verify_decay(seq: &[f64], theta: f64, beta: f64) -> Result<ViolationReport> {
    let factor = (1.0 + beta / (1.0 - theta)) * theta;
    if theta >= 1.0 || factor >= 1.0 {
        return Err(Error::DecayPrecondition { value: factor });
    }
    let rate = 1.0 - factor;
    Ok(check_rate(seq, rate, false))
}

/// Checks the strengthened plus-one conclusion
/// `a_{t+1} >= (1 + θ + θβ/(1+θ)) a_t + 1` at every t >= 1, where θ plays
/// the role of ηδ.
pub fn verify_growth_plus_one(seq: &[f64], eta_delta: f64, beta: f64) -> ViolationReport {
    let rate = 1.0 + eta_delta + eta_delta * beta / (1.0 + eta_delta);
    let mut first_violation = None;
    let mut checked = 0;
    for i in 2..seq.len().saturating_sub(1) {
        let cur = seq[i];
        let next = seq[i + 1];
        let target = rate * cur + 1.0;
        let slack = VERIFY_SLACK * target.abs().max(cur.abs()).max(1.0);
        checked += 1;
        if next < target - slack {
            first_violation = Some(i - 1);
            break;
        }
    }
    ViolationReport {
        first_violation,
        checked,
    }
}

/// Closed-form floor for the plus-one recursion started at `a_0 = a_{-1} = 0`:
/// `a_t >= ((1 + ρ_β)^t - 1) / ρ_β` with `ρ_β = ηδ (1 + β/(1+ηδ))`.
pub fn plus_one_closed_form_floor(eta_delta: f64, beta: f64, t: usize) -> f64 {
    let rho = eta_delta * (1.0 + beta / (1.0 + eta_delta));
    ((1.0 + rho).powi(t as i32) - 1.0) / rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn growth_spec(theta: f64, beta: f64, a0: f64, a_minus1: f64) -> RecursionSpec {
        RecursionSpec {
            theta,
            beta,
            mode: RecursionMode::Growth,
            a0,
            a_minus1,
        }
    }

    #[test]
    fn geometric_when_beta_zero() {
        let seq = simulate(&growth_spec(0.1, 0.0, 1.0, 1.0), 30).unwrap();
        for (i, v) in seq.iter().enumerate().skip(1) {
            let t = i - 1;
            let want = 1.1f64.powi(t as i32);
            assert!((v - want).abs() <= 1e-12 * want, "a_{t} = {v}, want {want}");
        }
    }

    #[test]
    fn hand_unrolled_first_steps() {
        // theta=0.1, beta=0.5, a0=a_{-1}=1: a1 = 1.1, a2 = 1.1*1.1 + 0.5*0.1 = 1.26
        let seq = simulate(&growth_spec(0.1, 0.5, 1.0, 1.0), 2).unwrap();
        assert!((seq[2] - 1.1).abs() < 1e-15);
        assert!((seq[3] - 1.26).abs() < 1e-15);
    }

    #[test]
    fn decay_geometric_when_beta_zero() {
        let spec = RecursionSpec {
            theta: 0.1,
            beta: 0.0,
            mode: RecursionMode::Decay,
            a0: 1.0,
            a_minus1: 1.0,
        };
        let seq = simulate(&spec, 30).unwrap();
        for (i, v) in seq.iter().enumerate().skip(1) {
            let t = i - 1;
            let want = 0.9f64.powi(t as i32);
            assert!((v - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn growth_rate_beta_zero_holds_with_equality() {
        let seq = simulate(&growth_spec(0.3, 0.0, 2.0, 2.0), 50).unwrap();
        let report = verify_growth(&seq, 0.3, 0.0);
        assert!(report.ok(), "violation at {:?}", report.first_violation);
        assert!(report.checked > 0);
    }

    #[test]
    fn growth_rate_mirror_non_positive() {
        let seq = simulate(&growth_spec(0.2, 0.7, -1.0, -1.0), 80).unwrap();
        let report = verify_growth(&seq, 0.2, 0.7);
        assert!(report.ok(), "mirror violation at {:?}", report.first_violation);
    }

    #[test]
    fn decay_rate_mirror_non_positive() {
        let spec = RecursionSpec {
            theta: 0.05,
            beta: 0.5,
            mode: RecursionMode::Decay,
            a0: -1.0,
            a_minus1: -1.0,
        };
        let seq = simulate(&spec, 80).unwrap();
        let report = verify_decay(&seq, 0.05, 0.5).unwrap();
        assert!(report.ok(), "mirror violation at {:?}", report.first_violation);
    }

    #[test]
    fn decay_rejects_inadmissible_parameters() {
        match verify_decay(&[1.0, 1.0, 0.5], 0.6, 1.0) {
            Err(Error::DecayPrecondition { value }) => assert!(value >= 1.0),
            other => panic!("expected precondition rejection, got {other:?}"),
        }
    }

    #[test]
    fn plus_one_beta_zero_equality() {
        let spec = RecursionSpec {
            theta: 0.05,
            beta: 0.0,
            mode: RecursionMode::GrowthPlusOne,
            a0: 0.0,
            a_minus1: 0.0,
        };
        let seq = simulate(&spec, 60).unwrap();
        // a_{t+1} = (1+theta) a_t + 1 holds with equality
        for i in 1..seq.len() - 1 {
            let want = 1.05 * seq[i] + 1.0;
            assert!((seq[i + 1] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        let report = verify_growth_plus_one(&seq, 0.05, 0.0);
        assert!(report.ok());
    }

    #[test]
    fn plus_one_closed_form_floor_holds() {
        for &(ed, beta) in &[(1e-3, 0.3), (0.01, 0.9), (0.5, 1.0), (0.1, 0.0)] {
            let spec = RecursionSpec {
                theta: ed,
                beta,
                mode: RecursionMode::GrowthPlusOne,
                a0: 0.0,
                a_minus1: 0.0,
            };
            let seq = simulate(&spec, 150).unwrap();
            for (i, &v) in seq.iter().enumerate().skip(1) {
                let t = i - 1;
                let floor = plus_one_closed_form_floor(ed, beta, t);
                assert!(
                    v >= floor - VERIFY_SLACK * floor.abs().max(1.0),
                    "a_{t} = {v} below closed-form floor {floor} (eta_delta={ed}, beta={beta})"
                );
            }
        }
    }

    #[test]
    fn overflow_guard_truncates() {
        let seq = simulate(&growth_spec(1.0, 1.0, 1.0, 1.0), 2000).unwrap();
        assert!(seq.len() < 2002);
        assert!(seq.iter().all(|v| v.abs() <= OVERFLOW_GUARD));
        // prefix still satisfies the rate
        assert!(verify_growth(&seq, 1.0, 1.0).ok());
    }

    #[test]
    fn matches_signal_recursion_with_frozen_norm() {
        // the population signal recursion with ||w_t|| frozen at c is the
        // growth recursion with theta = 3 eta (1 - c^2)
        let eta = 5e-4;
        let c: f64 = 0.3;
        let beta = 0.7;
        let theta = 3.0 * eta * (1.0 - c * c);
        let w0_par = 3e-3;

        let seq = simulate(&growth_spec(theta, beta, w0_par, w0_par), 500).unwrap();

        let mut prev = w0_par;
        let mut cur = w0_par;
        for t in 0..500 {
            let next = (1.0 + 3.0 * eta * (1.0 - c * c)) * cur + beta * (cur - prev);
            prev = cur;
            cur = next;
            let want = seq[t + 2];
            assert!(
                (cur - want).abs() <= 1e-12 * want.abs(),
                "bridge mismatch at t={t}: {cur} vs {want}"
            );
        }
    }

    #[test]
    fn growth_monotone_in_beta() {
        // equality-simulated a_T is non-decreasing in beta for fixed theta
        for &theta in &[0.01, 0.1, 0.5] {
            let mut prev_last = f64::MIN;
            for k in 0..=10 {
                let beta = k as f64 / 10.0;
                let seq = simulate(&growth_spec(theta, beta, 1.0, 1.0), 200).unwrap();
                let last = *seq.last().unwrap();
                assert!(
                    last >= prev_last - 1e-12 * last.abs(),
                    "a_T not monotone in beta at theta={theta}, beta={beta}"
                );
                prev_last = last;
            }
        }
    }

    #[test]
    fn decay_monotone_in_beta() {
        // compared only while the equality-simulated sequences stay
        // non-negative for the whole horizon; a zero crossing leaves the
        // hypothesis regime
        for &theta in &[0.01, 0.1, 0.3] {
            let mut prev_last = f64::MAX;
            for k in 0..=10 {
                let beta = k as f64 / 10.0;
                if (1.0 + beta / (1.0 - theta)) * theta >= 1.0 {
                    break;
                }
                let spec = RecursionSpec {
                    theta,
                    beta,
                    mode: RecursionMode::Decay,
                    a0: 1.0,
                    a_minus1: 1.0,
                };
                let seq = simulate(&spec, 200).unwrap();
                if seq.iter().any(|&v| v < 0.0) {
                    break;
                }
                let last = *seq.last().unwrap();
                assert!(
                    last <= prev_last + 1e-12,
                    "b_T not monotone in beta at theta={theta}, beta={beta}"
                );
                prev_last = last;
            }
        }
    }
}
