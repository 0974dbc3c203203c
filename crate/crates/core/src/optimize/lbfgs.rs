use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::DVector;

use super::{
    check_init, RunReport, ShrinkSchedule, SmoothedObjective, StopRule, Termination, Traces,
};
use crate::error::{Result, VoError};

/// Limited-memory BFGS with a strong Wolfe line search.
///
/// Curvature pairs are always formed from two gradients at the same
/// smoothing level, so they stay valid across shrinks and the memory is
/// kept when the level changes.
#[derive(Debug, Clone, Copy)]
pub struct QuasiNewton {
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_evals: usize,
}

impl Default for QuasiNewton {
    fn default() -> Self {
        Self {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            max_evals: 40,
        }
    }
}

/// Relative size below which a predicted decrease is lost in rounding.
const NOISE_FLOOR: f64 = 1e-10;

struct Point {
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
}

impl QuasiNewton {
    pub fn with_memory(memory: usize) -> Self {
        Self {
            memory,
            ..Self::default()
        }
    }

    pub fn minimize<O: SmoothedObjective + ?Sized>(
        &self,
        obj: &O,
        schedule: &ShrinkSchedule,
        init: &DVector<f64>,
        stop: &StopRule,
    ) -> Result<RunReport> {
        check_init(obj, init)?;
        if self.memory == 0 {
            return Err(VoError::Domain(
                "quasi-Newton memory must be positive".into(),
            ));
        }
        let start = Instant::now();
        let mut level = schedule.level(0);
        let (f, g) = obj.eval(init, level)?;
        let mut cur = Point {
            x: init.clone(),
            f,
            g,
        };
        let grad_scale = cur.g.norm().max(1.0);
        let mut pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
        let mut traces = Traces::default();
        let mut termination = Termination::MaxIterations;
        let mut non_descent = 0;
        let mut iterations = 0;

        let mut iter = 0;
        while iter < stop.max_iters {
            let next_level = schedule.level(iter);
            if next_level != level {
                level = next_level;
                let (f, g) = obj.eval(&cur.x, level)?;
                cur.f = f;
                cur.g = g;
            }
            let objective = obj.objective(&cur.x)?;
            traces.push(objective, cur.f, level)?;
            if stop.target_objective.is_some_and(|t| objective <= t) {
                termination = Termination::TargetReached;
                break;
            }
            if cur.g.norm() < stop.rel_change_tol * grad_scale {
                if let Some(next) = schedule.next_shrink(iter) {
                    iter = next;
                    continue;
                }
                termination = Termination::Converged;
                break;
            }

            let mut dir = two_loop(&cur.g, &pairs);
            if !(dir.dot(&cur.g) < 0.0) {
                non_descent += 1;
                pairs.clear();
                dir = -&cur.g;
            }
            let mut search = self.line_search(obj, &cur, &dir, level, !pairs.is_empty())?;
            if matches!(search, Search::Failed { .. }) && !pairs.is_empty() {
                // retry once from steepest descent with a fresh memory
                pairs.clear();
                dir = -&cur.g;
                search = self.line_search(obj, &cur, &dir, level, false)?;
            }
            let next = match search {
                Search::Found(p) => p,
                Search::Failed {
                    smallest_step,
                    inconsistency,
                } => {
                    let predicted = smallest_step * cur.g.norm_squared();
                    let noise = NOISE_FLOOR * cur.f.abs().max(1.0);
                    if predicted > noise || inconsistency > noise {
                        termination = Termination::Stalled;
                        break;
                    }
                    // no measurable decrease is left at this level
                    if let Some(next) = schedule.next_shrink(iter) {
                        iter = next;
                        continue;
                    }
                    termination = Termination::Converged;
                    break;
                }
            };

            let s = &next.x - &cur.x;
            let y = &next.g - &cur.g;
            let sy = s.dot(&y);
            if sy > f64::EPSILON * s.norm() * y.norm() {
                if pairs.len() == self.memory {
                    pairs.pop_front();
                }
                pairs.push_back((s, y, 1.0 / sy));
            }
            cur = next;
            iterations += 1;
            iter += 1;
        }

        let report = RunReport {
            final_objective: obj.objective(&cur.x)?,
            final_point: cur.x.iter().copied().collect(),
            final_bound: cur.f,
            final_smoothing: level,
            gap_certificate: obj.certificate(level)?,
            iterations,
            objective_trace: traces.objective,
            bound_trace: traces.bound,
            smoothing_trace: traces.smoothing,
            non_descent_steps: non_descent,
            termination,
            wall_time: start.elapsed(),
        };
        if termination == Termination::Stalled {
            return Err(VoError::Stalled {
                report: Box::new(report),
            });
        }
        Ok(report)
    }

    /// Strong Wolfe line search (bracketing then zoom with cubic
    /// interpolation), followed by one secant refinement towards the exact
    /// line minimizer when it improves the accepted point.
    fn line_search<O: SmoothedObjective + ?Sized>(
        &self,
        obj: &O,
        cur: &Point,
        dir: &DVector<f64>,
        level: f64,
        scaled: bool,
    ) -> Result<Search> {
        let f0 = cur.f;
        let d0 = cur.g.dot(dir);
        let mut evals = 0;
        let mut smallest_step = f64::INFINITY;
        let mut inconsistency = f64::NEG_INFINITY;
        let mut probe = |alpha: f64, evals: &mut usize| -> Result<(Point, f64)> {
            *evals += 1;
            smallest_step = smallest_step.min(alpha);
            let x = &cur.x + dir * alpha;
            let (f, g) = obj.eval(&x, level)?;
            let d = g.dot(dir);
            // convexity with an exact gradient forces f(α) − f₀ ≤ α·f′(α)
            inconsistency = inconsistency.max(f - f0 - alpha * d);
            Ok((Point { x, f, g }, d))
        };
        let armijo = |alpha: f64, f: f64| f.is_finite() && f <= f0 + self.c1 * alpha * d0;
        let curvature = |d: f64| d.abs() <= -self.c2 * d0;

        let mut alpha = if scaled {
            1.0
        } else {
            (1.0 / dir.norm()).min(1.0)
        };
        let (mut a_prev, mut f_prev, mut d_prev) = (0.0, f0, d0);
        let mut accepted: Option<(Point, f64, f64)> = None;
        // best sufficient-decrease point, used if the curvature test never passes
        let mut fallback: Option<(Point, f64, f64)> = None;
        let keep = |p: &Point, a: f64, d: f64, fallback: &mut Option<(Point, f64, f64)>| {
            if armijo(a, p.f) && p.f < f0 && fallback.as_ref().is_none_or(|b| p.f < b.0.f) {
                *fallback = Some((
                    Point {
                        x: p.x.clone(),
                        f: p.f,
                        g: p.g.clone(),
                    },
                    a,
                    d,
                ));
            }
        };
        let mut bracket: Option<((f64, f64, f64), (f64, f64, f64))> = None;

        while evals < self.max_evals {
            let (p, d) = probe(alpha, &mut evals)?;
            keep(&p, alpha, d, &mut fallback);
            if !armijo(alpha, p.f) || (a_prev > 0.0 && p.f >= f_prev) {
                bracket = Some(((a_prev, f_prev, d_prev), (alpha, p.f, d)));
                break;
            }
            if curvature(d) {
                accepted = Some((p, alpha, d));
                break;
            }
            if d >= 0.0 {
                bracket = Some(((alpha, p.f, d), (a_prev, f_prev, d_prev)));
                break;
            }
            a_prev = alpha;
            f_prev = p.f;
            d_prev = d;
            alpha *= 2.0;
        }

        if accepted.is_none() {
            if let Some((mut lo, mut hi)) = bracket {
                while evals < self.max_evals {
                    let width = hi.0 - lo.0;
                    if width.abs() <= f64::EPSILON * lo.0.abs().max(1e-300) {
                        break;
                    }
                    let a = zoom_trial(lo, hi);
                    let (p, d) = probe(a, &mut evals)?;
                    keep(&p, a, d, &mut fallback);
                    if !armijo(a, p.f) || p.f >= lo.1 {
                        hi = (a, p.f, d);
                    } else {
                        if curvature(d) {
                            accepted = Some((p, a, d));
                            break;
                        }
                        if d * (hi.0 - lo.0) >= 0.0 {
                            hi = lo;
                        }
                        lo = (a, p.f, d);
                    }
                }
            }
        }

        let Some((point, a, d)) = accepted else {
            return Ok(match fallback {
                Some((p, _, _)) => Search::Found(p),
                None => Search::Failed {
                    smallest_step,
                    inconsistency,
                },
            });
        };
        if d.abs() > 1e-10 * d0.abs() && d > d0 && evals < self.max_evals {
            let a_sec = a * d0 / (d0 - d);
            if a_sec.is_finite() && a_sec > 0.0 && (a_sec - a).abs() > 1e-12 * a {
                let (p, d_sec) = probe(a_sec, &mut evals)?;
                if p.f <= point.f && armijo(a_sec, p.f) && curvature(d_sec) {
                    return Ok(Search::Found(p));
                }
            }
        }
        Ok(Search::Found(point))
    }
}

enum Search {
    Found(Point),
    /// No acceptable point. `smallest_step` is the shortest step tried and
    /// `inconsistency` the largest f(α) − f₀ − α·f′(α) seen, which is never
    /// positive beyond rounding for a convex objective.
    Failed {
        smallest_step: f64,
        inconsistency: f64,
    },
}

/// Minimizer of the cubic through the bracket endpoints, kept away from the
/// ends of the interval; falls back to bisection.
fn zoom_trial(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let (a, fa, da) = lo;
    let (b, fb, db) = hi;
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let cubic = if disc >= 0.0 && fb.is_finite() {
        let d2 = (b - a).signum() * disc.sqrt();
        let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
        t.is_finite().then_some(t)
    } else {
        None
    };
    match cubic {
        Some(t) if t >= left + margin && t <= right - margin => t,
        _ => 0.5 * (a + b),
    }
}

/// Two-loop recursion: returns −H·g for the limited-memory inverse Hessian
/// with initial scaling sᵀy / yᵀy from the newest pair.
fn two_loop(g: &DVector<f64>, pairs: &VecDeque<(DVector<f64>, DVector<f64>, f64)>) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    -q
}

/// [`QuasiNewton::minimize`] with default line-search constants.
pub fn quasi_newton_minimize<O: SmoothedObjective + ?Sized>(
    obj: &O,
    schedule: &ShrinkSchedule,
    init: &DVector<f64>,
    stop: &StopRule,
    memory: usize,
) -> Result<RunReport> {
    QuasiNewton::with_memory(memory).minimize(obj, schedule, init, stop)
}
