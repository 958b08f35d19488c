//! Heavy Ball iteration in its two equivalent presentations, β-schedules
//! (constant, and switch-to-lower-β with momentum reset), and the generic
//! trace-producing run loop used by every experiment.
//!
//! The two presentations of the update with step size η and momentum β:
//!
//! * iterate form:      `w_{t+1} = w_t - η ∇f(w_t) + β (w_t - w_{t-1})`,
//!   initialized with `w_0 = w_{-1}`;
//! * accumulator form:  `m_t = β m_{t-1} + ∇f(w_t)`, `w_{t+1} = w_t - η m_t`,
//!   initialized with `m_{-1} = 0`.
//!
//! Given the same gradient stream the two produce identical iterates in real
//! arithmetic; floating point keeps them within ~1e-10 over thousands of
//! steps, which the test suite pins down.

use crate::numkit::norm;
use crate::{Error, Result};

/// Hard cap on the iterate norm. β near 1 can diverge once the iterate is
/// inside a convex basin, so runs abort with a diagnostic past this point.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Momentum-parameter schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    /// Fixed β for the whole run.
    Constant(f64),
    /// Start at β = 1 and drop to `beta_lo` (resetting the momentum) the
    /// first time the relative objective drop from f(w_1) reaches
    /// `threshold`, i.e. when `(f(w_1) - f(w_t)) / f(w_1) >= threshold`.
    Switch { beta_lo: f64, threshold: f64 },
}

/// Step size and β-schedule for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HBConfig {
    pub eta: f64,
    pub schedule: BetaSchedule,
}

impl HBConfig {
    pub fn constant(eta: f64, beta: f64) -> Result<Self> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::InvalidConfig(format!("eta must be > 0, got {eta}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!(
                "beta must be in [0, 1], got {beta}"
            )));
        }
        Ok(HBConfig {
            eta,
            schedule: BetaSchedule::Constant(beta),
        })
    }

    pub fn switch(eta: f64, beta_lo: f64, threshold: f64) -> Result<Self> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::InvalidConfig(format!("eta must be > 0, got {eta}")));
        }
        if !(0.0..1.0).contains(&beta_lo) {
            return Err(Error::InvalidConfig(format!(
                "beta_lo must be in [0, 1), got {beta_lo}"
            )));
        }
        if threshold.is_nan() || threshold <= 0.0 || threshold >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "switch threshold must be in (0, 1), got {threshold}"
            )));
        }
        Ok(HBConfig {
            eta,
            schedule: BetaSchedule::Switch { beta_lo, threshold },
        })
    }

    /// β in force at t = 0 (1.0 for switch schedules).
    pub fn initial_beta(&self) -> f64 {
        match self.schedule {
            BetaSchedule::Constant(b) => b,
            BetaSchedule::Switch { .. } => 1.0,
        }
    }
}

/// Which of the two equivalent presentations a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbForm {
    /// Keeps the previous iterate; momentum is the displacement.
    Iterate,
    /// Keeps the exponentially-weighted gradient accumulator `m_t`.
    Momentum,
}

/// Common interface over the two state presentations.
pub trait HbState {
    fn w(&self) -> &[f64];
    fn t(&self) -> usize;
    fn beta(&self) -> f64;
    fn switched(&self) -> bool;
    /// One update with the supplied gradient. Fails on non-finite gradients.
    fn step(&mut self, grad: &[f64], eta: f64) -> Result<()>;
    /// Zeroes the momentum (iterate form: previous iterate <- current).
    fn reset_momentum(&mut self);
    fn set_beta(&mut self, beta: f64);
    fn mark_switched(&mut self);
    /// `||m_t||` of the most recent step (0 before the first step).
    fn momentum_norm(&self, eta: f64) -> f64;
}

fn check_grad(grad: &[f64], dim: usize, t: usize) -> Result<()> {
    if grad.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: grad.len(),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { t });
    }
    Ok(())
}

/// Iterate-form state: `(w_t, w_{t-1})`.
#[derive(Debug, Clone)]
pub struct IterateForm {
    w: Vec<f64>,
    w_prev: Vec<f64>,
    t: usize,
    beta: f64,
    switched: bool,
}

impl IterateForm {
    pub fn new(w0: &[f64], config: &HBConfig) -> Self {
        IterateForm {
            w: w0.to_vec(),
            w_prev: w0.to_vec(), // w_0 = w_{-1}
            t: 0,
            beta: config.initial_beta(),
            switched: false,
        }
    }

    pub fn w_prev(&self) -> &[f64] {
        &self.w_prev
    }
}

impl HbState for IterateForm {
    fn w(&self) -> &[f64] {
        &self.w
    }
    fn t(&self) -> usize {
        self.t
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn switched(&self) -> bool {
        self.switched
    }

    fn step(&mut self, grad: &[f64], eta: f64) -> Result<()> {
        check_grad(grad, self.w.len(), self.t)?;
        let beta = self.beta;
        let next: Vec<f64> = self
            .w
            .iter()
            .zip(&self.w_prev)
            .zip(grad)
            .map(|((&wi, &wp), &gi)| wi - eta * gi + beta * (wi - wp))
            .collect();
        self.w_prev = std::mem::replace(&mut self.w, next);
        self.t += 1;
        Ok(())
    }

    fn reset_momentum(&mut self) {
        self.w_prev = self.w.clone();
    }
    fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }
    fn mark_switched(&mut self) {
        self.switched = true;
    }

    fn momentum_norm(&self, eta: f64) -> f64 {
        // w_{t+1} = w_t - eta m_t, so ||m_t|| = ||w_{t+1} - w_t|| / eta.
        self.w
            .iter()
            .zip(&self.w_prev)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / eta
    }
}

/// Accumulator-form state: `(w_t, m_{t-1})`.
#[derive(Debug, Clone)]
pub struct MomentumForm {
    w: Vec<f64>,
    m: Vec<f64>,
    t: usize,
    beta: f64,
    switched: bool,
}

impl MomentumForm {
    pub fn new(w0: &[f64], config: &HBConfig) -> Self {
        MomentumForm {
            w: w0.to_vec(),
            m: vec![0.0; w0.len()], // m_{-1} = 0
            t: 0,
            beta: config.initial_beta(),
            switched: false,
        }
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }
}

impl HbState for MomentumForm {
    fn w(&self) -> &[f64] {
        &self.w
    }
    fn t(&self) -> usize {
        self.t
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn switched(&self) -> bool {
        self.switched
    }

    fn step(&mut self, grad: &[f64], eta: f64) -> Result<()> {
        check_grad(grad, self.w.len(), self.t)?;
        let beta = self.beta;
        for (mi, &gi) in self.m.iter_mut().zip(grad) {
            *mi = beta * *mi + gi;
        }
        for (wi, &mi) in self.w.iter_mut().zip(&self.m) {
            *wi -= eta * mi;
        }
        self.t += 1;
        Ok(())
    }

    fn reset_momentum(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
    }
    fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }
    fn mark_switched(&mut self) {
        self.switched = true;
    }

    fn momentum_norm(&self, _eta: f64) -> f64 {
        norm(&self.m)
    }
}

/// Applies the switch schedule. Fires at most once per run, only for
/// switch-type schedules, and skips the test entirely when `f_1 == 0`.
/// Returns whether the switch fired on this call.
pub fn schedule_update<S: HbState>(state: &mut S, config: &HBConfig, f_1: f64, f_t: f64) -> bool {
    let BetaSchedule::Switch { beta_lo, threshold } = config.schedule else {
        return false;
    };
    if state.switched() || f_1 == 0.0 {
        return false;
    }
    if (f_1 - f_t) / f_1 >= threshold {
        state.set_beta(beta_lo);
        state.reset_momentum();
        state.mark_switched();
        return true;
    }
    false
}

/// An objective with a gradient oracle and optional per-iteration scalars
/// recorded into the trace.
pub trait Problem: Sync {
    fn dim(&self) -> usize;
    fn objective(&self, w: &[f64]) -> f64;
    fn gradient(&self, w: &[f64]) -> Vec<f64>;
    /// Problem-specific scalars recorded alongside f and the norms.
    fn extras(&self, _w: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn extra_names(&self) -> &'static [&'static str] {
        &[]
    }
}

/// One per-iteration record.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub t: usize,
    pub f: f64,
    pub norm_w: f64,
    pub extras: Vec<f64>,
    pub norm_m: f64,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    /// Ran through the full iteration cap.
    Completed,
    /// The caller-supplied stop predicate fired at iteration `t`.
    EarlyStopped { t: usize },
    /// Step failure or divergence at iteration `t`; the trace is partial.
    Failed { t: usize, error: Error },
}

/// Per-iteration record stream of one run. Contains `iterations + 1`
/// records with `t` strictly increasing from 0.
#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub extra_names: &'static [&'static str],
    pub outcome: RunOutcome,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace has at least one record")
    }
    pub fn failed(&self) -> bool {
        matches!(self.outcome, RunOutcome::Failed { .. })
    }
}

fn make_record<P: Problem>(problem: &P, w: &[f64], t: usize, norm_m: f64) -> TraceRecord {
    TraceRecord {
        t,
        f: problem.objective(w),
        norm_w: norm(w),
        extras: problem.extras(w),
        norm_m,
    }
}

fn drive<P: Problem, S: HbState>(
    problem: &P,
    state: &mut S,
    config: &HBConfig,
    cap: usize,
    stop: &dyn Fn(&TraceRecord) -> bool,
    mut observe: impl FnMut(&S),
) -> Trace {
    let mut records = Vec::with_capacity(cap + 1);
    records.push(make_record(problem, state.w(), 0, 0.0));
    observe(state);

    let mut f_1 = 0.0;
    let mut outcome = RunOutcome::Completed;
    while state.t() < cap {
        let grad = problem.gradient(state.w());
        if let Err(error) = state.step(&grad, config.eta) {
            outcome = RunOutcome::Failed {
                t: state.t(),
                error,
            };
            break;
        }
        let norm_m = state.momentum_norm(config.eta);
        let record = make_record(problem, state.w(), state.t(), norm_m);
        if state.t() == 1 {
            f_1 = record.f;
        }
        schedule_update(state, config, f_1, record.f);
        observe(state);

        if record.norm_w > DIVERGENCE_GUARD {
            let t = state.t();
            let norm = record.norm_w;
            records.push(record);
            outcome = RunOutcome::Failed {
                t,
                error: Error::Diverged { t, norm },
            };
            break;
        }
        let fire_stop = stop(&record);
        records.push(record);
        if fire_stop {
            outcome = RunOutcome::EarlyStopped { t: state.t() };
            break;
        }
    }

    Trace {
        records,
        extra_names: problem.extra_names(),
        outcome,
    }
}

/// Runs Heavy Ball on `problem` from `w0` for at most `cap` iterations,
/// stopping early when `stop` fires on a freshly produced record.
pub fn run<P: Problem>(
    problem: &P,
    w0: &[f64],
    config: &HBConfig,
    form: HbForm,
    cap: usize,
    stop: &dyn Fn(&TraceRecord) -> bool,
) -> Trace {
    match form {
        HbForm::Iterate => {
            let mut state = IterateForm::new(w0, config);
            drive(problem, &mut state, config, cap, stop, |_| {})
        }
        HbForm::Momentum => {
            let mut state = MomentumForm::new(w0, config);
            drive(problem, &mut state, config, cap, stop, |_| {})
        }
    }
}

/// Like [`run`], additionally returning every iterate `w_0, …, w_T`.
pub fn run_recorded<P: Problem>(
    problem: &P,
    w0: &[f64],
    config: &HBConfig,
    form: HbForm,
    cap: usize,
    stop: &dyn Fn(&TraceRecord) -> bool,
) -> (Trace, Vec<Vec<f64>>) {
    let mut iterates = Vec::with_capacity(cap + 1);
    let trace = match form {
        HbForm::Iterate => {
            let mut state = IterateForm::new(w0, config);
            drive(problem, &mut state, config, cap, stop, |s| {
                iterates.push(s.w().to_vec())
            })
        }
        HbForm::Momentum => {
            let mut state = MomentumForm::new(w0, config);
            drive(problem, &mut state, config, cap, stop, |s| {
                iterates.push(s.w().to_vec())
            })
        }
    };
    (trace, iterates)
}

/// Never stop early; run to the iteration cap.
pub fn no_stop(_: &TraceRecord) -> bool {
    false
}
