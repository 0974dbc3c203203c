use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Regularizers, Task, SMO_TOL, SUBGRADIENT_ITERS, SVM_TARGET};
use super::generate::{gen_binary, gen_fused_sized, gen_lasso_sized, gen_svm, instance_seed};
use crate::binary::{binary_vo_multistart, brute_force_max, ENUMERATION_LIMIT};
use crate::error::{Result, VoError};
use crate::lasso::{
    fused_reference_solve, lasso_value, shooting_solve_with, LassoObjective, LassoSpec,
    ShootingOptions,
};
use crate::optimize::{DiagNewton, QuasiNewton, RunReport};
use crate::svm::{smo_reference_solve, HuberObjective, KernelProblem, SvmVoObjective};

/// One solver on one instance. Failed runs carry NaN in every numeric
/// field except `iterations` and `wall_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub task: String,
    pub dim: usize,
    pub seed: u64,
    pub solver: String,
    pub objective: f64,
    /// Distance to the best solver on the same instance, relative to its
    /// magnitude (absolute when the best value is zero); never negative.
    pub relative_error: f64,
    pub gap_certificate: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverFailure {
    pub seed: u64,
    pub solver: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<SolverFailure>,
}

impl SuiteOutcome {
    pub fn all_completed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct SolverRun {
    objective: f64,
    gap: f64,
    iterations: usize,
}

impl From<&RunReport> for SolverRun {
    fn from(r: &RunReport) -> Self {
        Self {
            objective: r.final_objective,
            gap: r.gap_certificate,
            iterations: r.iterations,
        }
    }
}

struct Attempt {
    solver: &'static str,
    result: Result<SolverRun>,
    seconds: f64,
}

fn timed(solver: &'static str, f: impl FnOnce() -> Result<SolverRun>) -> Attempt {
    let start = Instant::now();
    let result = f();
    Attempt {
        solver,
        result,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every repeat of a solver task. Repeats run in parallel on
/// independent instance seeds; rows come back in repeat order.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutcome> {
    config.validate()?;
    if config.task == Task::Props {
        return Err(VoError::Unsupported(
            "the props task runs through the property suites".into(),
        ));
    }
    let per_repeat: Vec<Result<(u64, Vec<Attempt>)>> = (0..config.repeats as u64)
        .into_par_iter()
        .map(|r| {
            let seed = instance_seed(config.seed, r);
            run_instance(config, seed).map(|a| (seed, a))
        })
        .collect();

    let mut outcome = SuiteOutcome {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let maximize = config.task == Task::Binary;
    for item in per_repeat {
        let (seed, attempts) = item?;
        let values = attempts
            .iter()
            .filter_map(|a| a.result.as_ref().ok().map(|r| r.objective));
        let best = if maximize {
            values.fold(f64::NEG_INFINITY, f64::max)
        } else {
            values.fold(f64::INFINITY, f64::min)
        };
        for a in attempts {
            let mut row = ReportRow {
                task: config.task.name().to_string(),
                dim: config.dim,
                seed,
                solver: a.solver.to_string(),
                objective: f64::NAN,
                relative_error: f64::NAN,
                gap_certificate: f64::NAN,
                iterations: 0,
                wall_time_s: a.seconds,
            };
            match a.result {
                Ok(run) => {
                    let diff = if maximize {
                        best - run.objective
                    } else {
                        run.objective - best
                    };
                    let scale = if best != 0.0 { best.abs() } else { 1.0 };
                    row.objective = run.objective;
                    row.relative_error = diff / scale;
                    row.gap_certificate = run.gap;
                    row.iterations = run.iterations;
                }
                Err(e) => {
                    if let VoError::Stalled { report } = &e {
                        row.iterations = report.iterations;
                    }
                    outcome.failures.push(SolverFailure {
                        seed,
                        solver: a.solver.to_string(),
                        message: e.to_string(),
                    });
                }
            }
            outcome.rows.push(row);
        }
    }
    Ok(outcome)
}

/// Instance generation errors abort the suite; solver errors become
/// failed rows.
fn run_instance(config: &ExperimentConfig, seed: u64) -> Result<Vec<Attempt>> {
    match config.task {
        Task::Lasso => {
            let spec = lasso_instance(config, seed)?;
            Ok(vec![
                timed("vo_newton", || {
                    let obj = LassoObjective::new(&spec);
                    let init = DVector::zeros(spec.dim());
                    let r = DiagNewton::default().minimize(
                        &obj,
                        &config.schedule,
                        &init,
                        &config.stop,
                    )?;
                    Ok((&r).into())
                }),
                timed("shooting", || {
                    let run = shooting_solve_with(&spec, ShootingOptions::default())?;
                    Ok(SolverRun {
                        objective: lasso_value(&spec, &run.w)?,
                        gap: 0.0,
                        iterations: run.sweeps,
                    })
                }),
            ])
        }
        Task::Fused => {
            let spec = lasso_instance(config, seed)?;
            Ok(vec![
                timed("vo_quasi_newton", || {
                    let obj = LassoObjective::new(&spec);
                    let init = DVector::zeros(spec.dim());
                    let r = QuasiNewton::with_memory(config.memory).minimize(
                        &obj,
                        &config.schedule,
                        &init,
                        &config.stop,
                    )?;
                    Ok((&r).into())
                }),
                timed("subgradient", || {
                    let run = fused_reference_solve(&spec, SUBGRADIENT_ITERS)?;
                    Ok(SolverRun {
                        objective: run.objective,
                        gap: 0.0,
                        iterations: SUBGRADIENT_ITERS,
                    })
                }),
            ])
        }
        Task::Svm => {
            let mut prob = gen_svm(config.n_points, config.dim, seed)?;
            if let Regularizers::Cost(c) = config.regularizers {
                prob = prob.with_cost(c)?;
            }
            let init = svm_init(&prob, seed);
            let smo = timed("smo", || {
                let sol = smo_reference_solve(&prob, SMO_TOL)?;
                Ok(SolverRun {
                    objective: sol.primal,
                    gap: 0.0,
                    iterations: sol.iterations,
                })
            });
            let mut stop = config.stop;
            if let Ok(s) = &smo.result {
                stop = stop.with_target(s.objective + SVM_TARGET * s.objective.abs());
            }
            let qn = QuasiNewton::with_memory(config.memory);
            let vo = timed("vo_quasi_newton", || {
                let r = qn.minimize(&SvmVoObjective::new(&prob), &config.schedule, &init, &stop)?;
                Ok((&r).into())
            });
            let huber = timed("huber", || {
                let r = qn.minimize(
                    &HuberObjective::new(&prob),
                    &config.huber_schedule,
                    &init,
                    &stop,
                )?;
                Ok((&r).into())
            });
            Ok(vec![vo, huber, smo])
        }
        Task::Binary => {
            let qp = gen_binary(config.dim, seed)?;
            let mut out = vec![timed("vo_bernoulli", || {
                let run = binary_vo_multistart(&qp, config.restarts, config.stop.max_iters, seed)?;
                Ok(SolverRun {
                    objective: run.f_rounded,
                    gap: (run.bound - run.f_rounded).abs(),
                    iterations: run.steps,
                })
            })];
            if config.dim <= ENUMERATION_LIMIT {
                out.push(timed("brute_force", || {
                    let (_, f) = brute_force_max(&qp)?;
                    Ok(SolverRun {
                        objective: f,
                        gap: 0.0,
                        iterations: 1usize << config.dim,
                    })
                }));
            }
            Ok(out)
        }
        Task::Props => unreachable!("rejected in run_suite"),
    }
}

fn lasso_instance(config: &ExperimentConfig, seed: u64) -> Result<LassoSpec> {
    let (mut spec, _) = match config.task {
        Task::Fused => gen_fused_sized(config.dim, config.n_points, seed)?,
        _ => gen_lasso_sized(config.dim, config.n_points, seed)?,
    };
    if let Regularizers::Lasso { lambda1, lambda2 } = config.regularizers {
        spec = LassoSpec::new(spec.quad, lambda1, lambda2)?;
    }
    Ok(spec)
}

/// Standard normal start for both svm solvers, from its own stream of the
/// instance seed.
fn svm_init(prob: &KernelProblem, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    DVector::from_fn(prob.len() + 1, |_, _| StandardNormal.sample(&mut rng))
}
