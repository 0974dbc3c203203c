//! Bound minimizers with annealed smoothing.
//!
//! Both optimizers work on a [`SmoothedObjective`]: a family of smooth
//! surrogates indexed by a smoothing level `s` (the Gaussian σ, or the Huber
//! half-width h) together with the original objective the surrogates bound.
//! The smoothing level follows a [`ShrinkSchedule`] across iterations.

mod lbfgs;
mod newton;

use std::time::Duration;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{domain, Result};

pub use lbfgs::{quasi_newton_minimize, QuasiNewton};
pub use newton::{diag_newton_minimize, DiagNewton};

/// A smoothed surrogate family plus the objective it approximates.
///
/// Implementations must be pure: the same point and level always give the
/// same result.
pub trait SmoothedObjective {
    fn dim(&self) -> usize;

    /// Surrogate value and gradient at smoothing level `s`.
    fn eval(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>)>;

    /// The original (non-smooth) objective.
    fn objective(&self, point: &DVector<f64>) -> Result<f64>;

    /// Upper bound on surrogate minus objective, uniformly over points.
    fn certificate(&self, s: f64) -> Result<f64>;
}

/// Surrogates that also expose the diagonal of their Hessian.
pub trait DiagCurvature: SmoothedObjective {
    fn eval_diag(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>, DVector<f64>)>;
}

/// Geometric annealing of the smoothing level: the level starts at
/// `initial` and is multiplied by `factor` every `every` iterations, never
/// going below `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShrinkSchedule {
    pub initial: f64,
    pub factor: f64,
    pub every: usize,
    pub floor: f64,
}

impl ShrinkSchedule {
    pub fn new(initial: f64, factor: f64, every: usize, floor: f64) -> Result<Self> {
        if !(floor >= 0.0) || !floor.is_finite() {
            return domain(format!("schedule floor must be >= 0, got {floor}"));
        }
        if !(initial > floor) || !initial.is_finite() {
            return domain(format!(
                "schedule initial level {initial} must exceed the floor {floor}"
            ));
        }
        if !(factor > 0.0 && factor <= 1.0) {
            return domain(format!("shrink factor must lie in (0, 1], got {factor}"));
        }
        if every == 0 {
            return domain("shrink interval must be at least one iteration");
        }
        Ok(Self {
            initial,
            factor,
            every,
            floor,
        })
    }

    /// A schedule that never shrinks.
    pub fn fixed(level: f64) -> Result<Self> {
        Self::new(level, 1.0, 1, 0.0)
    }

    /// Smoothing level in effect during iteration `iter` (0-based). Never
    /// below the smallest positive normal float, even with a zero floor.
    pub fn level(&self, iter: usize) -> f64 {
        let shrinks = (iter / self.every) as f64;
        (self.initial * self.factor.powf(shrinks))
            .max(self.floor)
            .max(f64::MIN_POSITIVE)
    }

    /// First iteration after `iter` at which the level drops, if any.
    pub fn next_shrink(&self, iter: usize) -> Option<usize> {
        let next = (iter / self.every + 1).checked_mul(self.every)?;
        (self.level(next) < self.level(iter)).then_some(next)
    }
}

/// Termination rule shared by both optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopRule {
    /// Relative threshold. Diagonal Newton compares the mean absolute step
    /// against the mean absolute solution; quasi-Newton compares the
    /// gradient norm against its initial value.
    pub rel_change_tol: f64,
    pub max_iters: usize,
    /// Optional early exit once the original objective drops to this value.
    pub target_objective: Option<f64>,
}

impl StopRule {
    pub fn new(rel_change_tol: f64, max_iters: usize) -> Result<Self> {
        if !(rel_change_tol > 0.0) {
            return domain(format!(
                "stop tolerance must be positive, got {rel_change_tol}"
            ));
        }
        if max_iters == 0 {
            return domain("max_iters must be positive");
        }
        Ok(Self {
            rel_change_tol,
            max_iters,
            target_objective: None,
        })
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target_objective = Some(target);
        self
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    TargetReached,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub final_point: Vec<f64>,
    pub final_objective: f64,
    pub final_bound: f64,
    pub final_smoothing: f64,
    pub gap_certificate: f64,
    pub iterations: usize,
    /// Original objective at the start of every iteration.
    pub objective_trace: Vec<f64>,
    /// Surrogate value at the start of every iteration, at that iteration's level.
    pub bound_trace: Vec<f64>,
    pub smoothing_trace: Vec<f64>,
    /// Quasi-Newton directions that failed the descent test and were
    /// replaced by steepest descent.
    pub non_descent_steps: usize,
    pub termination: Termination,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

impl RunReport {
    /// True when every recorded field except wall time matches.
    pub fn same_run(&self, other: &RunReport) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        bits(&self.final_point) == bits(&other.final_point)
            && self.final_objective.to_bits() == other.final_objective.to_bits()
            && self.final_bound.to_bits() == other.final_bound.to_bits()
            && self.final_smoothing.to_bits() == other.final_smoothing.to_bits()
            && self.gap_certificate.to_bits() == other.gap_certificate.to_bits()
            && self.iterations == other.iterations
            && bits(&self.objective_trace) == bits(&other.objective_trace)
            && bits(&self.bound_trace) == bits(&other.bound_trace)
            && bits(&self.smoothing_trace) == bits(&other.smoothing_trace)
            && self.non_descent_steps == other.non_descent_steps
            && self.termination == other.termination
    }
}

mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

/// Trace bookkeeping shared by the optimizers.
#[derive(Default)]
pub(crate) struct Traces {
    pub objective: Vec<f64>,
    pub bound: Vec<f64>,
    pub smoothing: Vec<f64>,
}

impl Traces {
    pub fn push(&mut self, objective: f64, bound: f64, level: f64) -> Result<()> {
        if !objective.is_finite() || !bound.is_finite() {
            return Err(crate::error::VoError::Solver(format!(
                "non-finite value (objective {objective}, bound {bound}) at level {level}"
            )));
        }
        self.objective.push(objective);
        self.bound.push(bound);
        self.smoothing.push(level);
        Ok(())
    }
}

pub(crate) fn check_init<O: SmoothedObjective + ?Sized>(
    obj: &O,
    init: &DVector<f64>,
) -> Result<()> {
    crate::error::check_len(obj.dim(), init.len())?;
    if init.iter().any(|v| !v.is_finite()) {
        return domain("initial point has non-finite entries");
    }
    Ok(())
}
