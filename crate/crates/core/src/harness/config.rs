use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Result, VoError};
use crate::optimize::{ShrinkSchedule, StopRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Lasso,
    Fused,
    Svm,
    Binary,
    Props,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Lasso,
        Task::Fused,
        Task::Svm,
        Task::Binary,
        Task::Props,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Lasso => "lasso",
            Task::Fused => "fused",
            Task::Svm => "svm",
            Task::Binary => "binary",
            Task::Props => "props",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = VoError;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| VoError::Domain(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Regularization strength; `Protocol` keeps the generator's own values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Regularizers {
    Protocol,
    Lasso { lambda1: f64, lambda2: f64 },
    Cost(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub dim: usize,
    pub n_points: usize,
    pub seed: u64,
    /// Smoothing schedule for the VO solver.
    pub schedule: ShrinkSchedule,
    /// Half-width schedule for the Huber solver (svm only).
    pub huber_schedule: ShrinkSchedule,
    pub stop: StopRule,
    pub regularizers: Regularizers,
    pub repeats: usize,
    /// Quasi-Newton memory for the fused and svm solvers.
    pub memory: usize,
    /// Random restarts of the binary ascent.
    pub restarts: usize,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Subgradient iterations for the fused reference solver.
pub const SUBGRADIENT_ITERS: usize = 20_000;
/// Dual KKT tolerance for the SMO reference solver.
pub const SMO_TOL: f64 = 1e-10;
/// Relative slack over the SMO optimum at which svm runs stop.
pub const SVM_TARGET: f64 = 1e-3;

impl ExperimentConfig {
    /// Standard experiment defaults for each task.
    pub fn for_task(task: Task) -> Self {
        let sched = |i, f, e, fl| ShrinkSchedule::new(i, f, e, fl).expect("valid default schedule");
        let stop = |t, m| StopRule::new(t, m).expect("valid default stop rule");
        let (dim, n_points, schedule, stop) = match task {
            Task::Lasso => (50, 500, sched(0.1, 0.9, 1, 1e-8), stop(1e-15, 100_000)),
            Task::Fused => (100, 1000, sched(0.1, 0.9, 1, 1e-8), stop(1e-6, 100_000)),
            Task::Svm => (100, 60, sched(1e-3, 0.1, 250, 1e-12), stop(1e-9, 20_000)),
            Task::Binary => (12, 0, sched(0.5, 1.0, 1, 0.0), stop(1e-12, 1000)),
            Task::Props => (8, 0, sched(0.1, 0.9, 1, 1e-8), stop(1e-12, 1000)),
        };
        Self {
            task,
            dim,
            n_points,
            seed: 0,
            schedule,
            huber_schedule: sched(10.0, 0.1, 250, 1e-12),
            stop,
            regularizers: Regularizers::Protocol,
            repeats: 1,
            memory: 100,
            restarts: 8,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.repeats == 0 || self.memory == 0 || self.restarts == 0 {
            return domain("dim, repeats, memory and restarts must be positive");
        }
        match self.task {
            Task::Fused if self.dim < 2 => return domain("fused lasso needs dim >= 2"),
            Task::Lasso | Task::Fused if self.n_points == 0 => {
                return domain("need at least one training point")
            }
            Task::Svm if self.n_points < 2 => return domain("svm needs at least two points"),
            _ => {}
        }
        match (self.task, self.regularizers) {
            (_, Regularizers::Protocol) => Ok(()),
            (Task::Lasso | Task::Fused, Regularizers::Lasso { lambda1, lambda2 })
                if lambda1 >= 0.0
                    && lambda2 >= 0.0
                    && lambda1.is_finite()
                    && lambda2.is_finite() =>
            {
                if self.task == Task::Lasso && lambda2 != 0.0 {
                    return domain("the standard lasso task takes lambda2 = 0");
                }
                Ok(())
            }
            (Task::Svm, Regularizers::Cost(c)) if c > 0.0 && c.is_finite() => Ok(()),
            (task, r) => domain(format!("regularizers {r:?} do not apply to task {task}")),
        }
    }
}
