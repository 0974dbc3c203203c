//! Randomized invariant checks behind the `props` task.

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::generate::{gen_binary, gen_fused_sized, gen_lasso_sized, gen_svm, instance_seed};
use crate::binary::{binary_bound_eval, brute_force_max, BernoulliParams, ENUMERATION_LIMIT};
use crate::error::{domain, Result, VoError};
use crate::lasso::{LassoObjective, LassoSpec};
use crate::optimize::SmoothedObjective;
use crate::svm::{HuberObjective, KernelProblem, SvmVoObjective};

/// Random cases per check and repeat.
pub const PROP_CASES: usize = 200;
/// Tolerance on the relative finite-difference gradient error.
pub const GRAD_TOL: f64 = 1e-6;
/// Same, for the multilinear binary bound.
pub const BINARY_GRAD_TOL: f64 = 1e-8;
/// Slack on the inequality checks, relative to the magnitudes involved.
pub const INEQ_SLACK: f64 = 1e-10;

/// Outcome of one check on one objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropRow {
    pub check: String,
    pub objective: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation seen, in the check's own units; ≤ 0 means slack.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropOutcome {
    pub rows: Vec<PropRow>,
}

impl PropOutcome {
    pub fn passed(&self) -> usize {
        self.rows.iter().map(|r| r.cases - r.failures).sum()
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    /// Records a case whose violation must not exceed `tol`.
    fn record(&mut self, violation: f64, tol: f64) {
        self.cases += 1;
        if !(violation <= tol) {
            self.failures += 1;
        }
        if violation.is_nan() || violation > self.worst {
            self.worst = violation;
        }
    }

    fn row(self, check: &str, objective: &str) -> PropRow {
        PropRow {
            check: check.into(),
            objective: objective.into(),
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
        }
    }
}

/// Max-norm distance between the analytic gradient and central
/// differences, relative to max(1, ‖g‖∞).
pub fn gradient_error<F>(f: F, x: &DVector<f64>, grad: &DVector<f64>) -> f64
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut worst = 0.0f64;
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        worst = worst.max((grad[i] - (up - down) / (2.0 * h)).abs());
    }
    worst / grad.amax().max(1.0)
}

fn normal_vec(len: usize, scale: f64, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Level drawn log-uniformly from [lo, hi].
fn log_uniform(lo: f64, hi: f64, rng: &mut ChaCha20Rng) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

enum Instance {
    Lasso(LassoSpec),
    Svm(KernelProblem),
}

struct Family {
    name: &'static str,
    /// Smoothing levels are drawn from this range.
    levels: (f64, f64),
    /// Scale of random points.
    spread: f64,
    make: fn(usize, u64) -> Result<Instance>,
}

fn with_objective<T>(
    inst: &Instance,
    huber: bool,
    f: impl FnOnce(&dyn SmoothedObjective) -> T,
) -> T {
    match inst {
        Instance::Lasso(spec) => f(&LassoObjective::new(spec)),
        Instance::Svm(prob) if huber => f(&HuberObjective::new(prob)),
        Instance::Svm(prob) => f(&SvmVoObjective::new(prob)),
    }
}

const FAMILIES: [(Family, bool); 4] = [
    (
        Family {
            name: "lasso",
            levels: (1e-3, 1.0),
            spread: 3.0,
            make: |d, s| Ok(Instance::Lasso(gen_lasso_sized(d, 10 * d, s)?.0)),
        },
        false,
    ),
    (
        Family {
            name: "fused",
            levels: (1e-3, 1.0),
            spread: 3.0,
            make: |d, s| Ok(Instance::Lasso(gen_fused_sized(d.max(2), 10 * d, s)?.0)),
        },
        false,
    ),
    (
        Family {
            name: "svm",
            levels: (1e-3, 1.0),
            spread: 0.2,
            make: |d, s| Ok(Instance::Svm(gen_svm(d.max(2), d, s)?)),
        },
        false,
    ),
    (
        Family {
            name: "huber",
            levels: (1e-2, 10.0),
            spread: 0.2,
            make: |d, s| Ok(Instance::Svm(gen_svm(d.max(2), d, s)?)),
        },
        true,
    ),
];

/// Runs every check: gradients against finite differences, the bound
/// property, gap certificates, midpoint convexity, and for the binary bound
/// its ordering against and tightness at the enumerated optimum.
pub fn run_props(config: &ExperimentConfig) -> Result<PropOutcome> {
    config.validate()?;
    if config.dim > ENUMERATION_LIMIT {
        return domain(format!(
            "props enumerate binary problems, so dim must be <= {ENUMERATION_LIMIT}"
        ));
    }
    let cases = PROP_CASES * config.repeats;
    let mut rows = Vec::new();
    for (fam, huber) in &FAMILIES {
        let mut grad = Tally::new();
        let mut bound = Tally::new();
        let mut cert = Tally::new();
        let mut convex = Tally::new();
        for case in 0..cases as u64 {
            let seed = instance_seed(config.seed, case);
            let inst = (fam.make)(config.dim, seed)?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(2);
            with_objective(&inst, *huber, |obj| -> Result<()> {
                let s = log_uniform(fam.levels.0, fam.levels.1, &mut rng);
                let x = normal_vec(obj.dim(), fam.spread, &mut rng);
                let y = normal_vec(obj.dim(), fam.spread, &mut rng);
                let (fx, gx) = obj.eval(&x, s)?;
                let (fy, _) = obj.eval(&y, s)?;
                let value = |p: &DVector<f64>| obj.eval(p, s).map(|v| v.0).unwrap_or(f64::NAN);
                grad.record(gradient_error(value, &x, &gx), GRAD_TOL);

                let orig = obj.objective(&x)?;
                let scale = fx.abs().max(orig.abs()).max(1.0);
                bound.record((orig - fx) / scale, INEQ_SLACK);
                cert.record((fx - orig - obj.certificate(s)?) / scale, INEQ_SLACK);

                let (fm, _) = obj.eval(&((&x + &y) * 0.5), s)?;
                let scale = fx.abs().max(fy.abs()).max(1.0);
                convex.record((fm - 0.5 * (fx + fy)) / scale, INEQ_SLACK);
                Ok(())
            })?;
        }
        rows.push(grad.row("gradient", fam.name));
        rows.push(bound.row("bound", fam.name));
        rows.push(cert.row("certificate", fam.name));
        rows.push(convex.row("convexity", fam.name));
    }
    rows.extend(binary_props(config, cases)?);
    Ok(PropOutcome { rows })
}

fn binary_props(config: &ExperimentConfig, cases: usize) -> Result<Vec<PropRow>> {
    let mut grad = Tally::new();
    let mut bound = Tally::new();
    let mut tight = Tally::new();
    for case in 0..cases as u64 {
        let seed = instance_seed(config.seed, case);
        let qp = gen_binary(config.dim, seed)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(2);
        let theta = DVector::from_fn(config.dim, |_, _| rng.random::<f64>());
        let (e, g) = binary_bound_eval(&qp, &BernoulliParams::new(theta.clone())?)?;
        // central differences leave the box only by 1e-6 at the faces; the
        // multilinear formula extends to that without change
        let value = |p: &DVector<f64>| {
            let clamped = p.map(|t| t.clamp(0.0, 1.0));
            if clamped != *p {
                return binary_extension(&qp, p);
            }
            binary_bound_eval(&qp, &BernoulliParams { theta: clamped })
                .map(|v| v.0)
                .unwrap_or(f64::NAN)
        };
        grad.record(gradient_error(value, &theta, &g), BINARY_GRAD_TOL);

        let (x_star, f_star) = brute_force_max(&qp)?;
        let scale = f_star.abs().max(1.0);
        bound.record((e - f_star) / scale, INEQ_SLACK);
        let (e_star, _) = binary_bound_eval(&qp, &BernoulliParams::vertex(&x_star))?;
        tight.record((e_star - f_star).abs() / scale, INEQ_SLACK);
    }
    Ok(vec![
        grad.row("gradient", "binary"),
        bound.row("bound", "binary"),
        tight.row("tightness", "binary"),
    ])
}

/// E(θ) = Σᵢ θᵢ(bᵢ + Aᵢᵢ) + Σ_{i≠j} Aᵢⱼθᵢθⱼ evaluated off the box.
fn binary_extension(qp: &crate::binary::BinaryQP, theta: &DVector<f64>) -> f64 {
    let a = qp.a();
    let mut v = 0.0;
    for i in 0..theta.len() {
        v += theta[i] * (qp.b()[i] + a[(i, i)]);
        for j in (0..theta.len()).filter(|&j| j != i) {
            v += a[(i, j)] * theta[i] * theta[j];
        }
    }
    v
}

/// Writes the property table as CSV (`check,objective,cases,failures,worst`)
/// or as a JSON array with the same fields.
pub fn write_props<W: Write>(outcome: &PropOutcome, format: OutputFormat, out: W) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| VoError::Solver(format!("report output: {e}"));
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(["check", "objective", "cases", "failures", "worst"])
                .map_err(|e| err(&e))?;
            for r in &outcome.rows {
                w.write_record([
                    r.check.clone(),
                    r.objective.clone(),
                    r.cases.to_string(),
                    r.failures.to_string(),
                    format!("{:.16e}", r.worst),
                ])
                .map_err(|e| err(&e))?;
            }
            w.flush().map_err(|e| err(&e))
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &outcome.rows).map_err(|e| err(&e))?;
            out.write_all(b"\n").map_err(|e| err(&e))
        }
    }
}

pub fn write_props_file(outcome: &PropOutcome, path: &Path, format: OutputFormat) -> Result<()> {
    let file =
        std::fs::File::create(path).map_err(|e| VoError::Solver(format!("report output: {e}")))?;
    write_props(outcome, format, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Task;

    #[test]
    fn small_suite_passes() {
        let mut cfg = ExperimentConfig::for_task(Task::Props);
        cfg.dim = 4;
        let out = run_props(&cfg).unwrap();
        assert_eq!(out.rows.len(), 4 * 4 + 3);
        assert!(out.rows.iter().all(|r| r.cases == PROP_CASES));
        assert!(out.all_passed(), "{:#?}", out.rows);
        assert_eq!(out.passed(), out.rows.len() * PROP_CASES);
    }

    #[test]
    fn tally_counts_nan_as_failure() {
        let mut t = Tally::new();
        t.record(0.0, 1.0);
        t.record(f64::NAN, 1.0);
        t.record(2.0, 1.0);
        assert_eq!((t.cases, t.failures), (3, 2));
    }

    #[test]
    fn gradient_error_detects_wrong_gradient() {
        let x = DVector::from_column_slice(&[0.3, -1.2]);
        let f = |p: &DVector<f64>| p[0] * p[0] + 3.0 * p[1];
        let good = DVector::from_column_slice(&[0.6, 3.0]);
        assert!(gradient_error(f, &x, &good) < 1e-8);
        let bad = DVector::from_column_slice(&[0.6, 2.9]);
        assert!(gradient_error(f, &x, &bad) > 1e-2);
    }
}
