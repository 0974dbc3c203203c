use std::time::Instant;

use nalgebra::DVector;

use super::{check_init, DiagCurvature, RunReport, ShrinkSchedule, StopRule, Termination, Traces};
use crate::error::{Result, VoError};

/// Damped Newton iteration using only the Hessian diagonal:
/// `x_i ← x_i − damping · g_i / H_ii`.
#[derive(Debug, Clone, Copy)]
pub struct DiagNewton {
    pub damping: f64,
}

impl Default for DiagNewton {
    fn default() -> Self {
        Self { damping: 0.1 }
    }
}

impl DiagNewton {
    /// Runs until the mean absolute step falls below
    /// `stop.rel_change_tol` times the mean absolute solution, the target
    /// objective is reached, or `stop.max_iters` iterations have run.
    pub fn minimize<O: DiagCurvature + ?Sized>(
        &self,
        obj: &O,
        schedule: &ShrinkSchedule,
        init: &DVector<f64>,
        stop: &StopRule,
    ) -> Result<RunReport> {
        check_init(obj, init)?;
        let start = Instant::now();
        let mut x = init.clone();
        let mut traces = Traces::default();
        let mut termination = Termination::MaxIterations;
        let mut iterations = 0;
        let mut level = schedule.level(0);

        for iter in 0..stop.max_iters {
            level = schedule.level(iter);
            let (value, grad, hess) = obj.eval_diag(&x, level)?;
            let objective = obj.objective(&x)?;
            traces.push(objective, value, level)?;
            if stop.target_objective.is_some_and(|t| objective <= t) {
                termination = Termination::TargetReached;
                break;
            }
            if let Some((index, &h)) = hess
                .iter()
                .enumerate()
                .find(|(_, h)| !(**h > 0.0) || !h.is_finite())
            {
                return Err(VoError::Curvature {
                    index,
                    value: h,
                    iteration: iter,
                });
            }

            let mut step_sum = 0.0;
            let mut size_sum = 0.0;
            for i in 0..x.len() {
                let step = self.damping * grad[i] / hess[i];
                x[i] -= step;
                step_sum += step.abs();
                size_sum += x[i].abs();
            }
            iterations = iter + 1;
            if step_sum == 0.0 || step_sum < stop.rel_change_tol * size_sum {
                termination = Termination::Converged;
                break;
            }
        }

        let (final_bound, _) = obj.eval(&x, level)?;
        Ok(RunReport {
            final_objective: obj.objective(&x)?,
            final_point: x.iter().copied().collect(),
            final_bound,
            final_smoothing: level,
            gap_certificate: obj.certificate(level)?,
            iterations,
            objective_trace: traces.objective,
            bound_trace: traces.bound,
            smoothing_trace: traces.smoothing,
            non_descent_steps: 0,
            termination,
            wall_time: start.elapsed(),
        })
    }
}

/// [`DiagNewton::minimize`] with the default damping of 0.1.
pub fn diag_newton_minimize<O: DiagCurvature + ?Sized>(
    obj: &O,
    schedule: &ShrinkSchedule,
    init: &DVector<f64>,
    stop: &StopRule,
) -> Result<RunReport> {
    DiagNewton::default().minimize(obj, schedule, init, stop)
}
