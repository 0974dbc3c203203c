//! Mean-field Bernoulli bound for maximizing f(x) = xᵀAx + bᵀx over
//! x ∈ {0,1}ᴰ.
//!
//! With independent xᵢ ~ Bernoulli(θᵢ), E[xᵢxⱼ] = θᵢθⱼ for i ≠ j and
//! E[xᵢ²] = θᵢ, so
//!
//! ```text
//! E(θ) = Σ_{i≠j} A_ij θᵢθⱼ + Σᵢ (bᵢ + A_ii) θᵢ  ≤  max_x f(x)
//! ```
//!
//! E is multilinear and agrees with f on every vertex of the unit cube.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{check_len, domain, Result, VoError};

/// Largest dimension [`brute_force_max`] will enumerate.
pub const ENUMERATION_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryQP {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl BinaryQP {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if b.is_empty() {
            return domain("binary program needs at least one variable");
        }
        if !a.is_square() {
            return domain(format!("A must be square, got {}×{}", a.nrows(), a.ncols()));
        }
        check_len(b.len(), a.nrows())?;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return domain("binary program has non-finite entries");
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// f(x) = xᵀAx + bᵀx at a vertex.
    pub fn value(&self, x: &[bool]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        Ok(self.vertex_value(x))
    }

    fn vertex_value(&self, x: &[bool]) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for i in (0..d).filter(|&i| x[i]) {
            total += self.b[i];
            for j in (0..d).filter(|&j| x[j]) {
                total += self.a[(i, j)];
            }
        }
        total
    }

    /// Step size 1/(2‖A‖∞ + ‖b‖∞ + 1) used by the multi-start driver.
    pub fn default_step(&self) -> f64 {
        let a_inf = self
            .a
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        1.0 / (2.0 * a_inf + self.b.amax() + 1.0)
    }
}

/// Marginal probabilities θᵢ = P(xᵢ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliParams {
    pub theta: DVector<f64>,
}

impl BernoulliParams {
    pub fn new(theta: DVector<f64>) -> Result<Self> {
        check_box(&theta)?;
        Ok(Self { theta })
    }

    pub fn vertex(x: &[bool]) -> Self {
        Self {
            theta: DVector::from_iterator(x.len(), x.iter().map(|&v| if v { 1.0 } else { 0.0 })),
        }
    }
}

fn check_box(theta: &DVector<f64>) -> Result<()> {
    if let Some((i, t)) = theta
        .iter()
        .enumerate()
        .find(|(_, t)| !(0.0..=1.0).contains(*t))
    {
        return domain(format!("theta[{i}] = {t} lies outside [0, 1]"));
    }
    Ok(())
}

/// E(θ) and its gradient Σ_{j≠i}(A_ij + A_ji)θⱼ + bᵢ + A_ii.
pub fn binary_bound_eval(qp: &BinaryQP, params: &BernoulliParams) -> Result<(f64, DVector<f64>)> {
    check_len(qp.dim(), params.theta.len())?;
    check_box(&params.theta)?;
    Ok(bound_parts(qp, &params.theta))
}

fn bound_parts(qp: &BinaryQP, theta: &DVector<f64>) -> (f64, DVector<f64>) {
    let d = qp.dim();
    let a = &qp.a;
    let mut value = 0.0;
    let mut grad = DVector::zeros(d);
    for i in 0..d {
        let diag = qp.b[i] + a[(i, i)];
        let mut cross = 0.0;
        let mut sym = 0.0;
        for j in (0..d).filter(|&j| j != i) {
            cross += a[(i, j)] * theta[j];
            sym += (a[(i, j)] + a[(j, i)]) * theta[j];
        }
        value += theta[i] * (cross + diag);
        grad[i] = sym + diag;
    }
    (value, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryVoResult {
    pub theta: BernoulliParams,
    /// E(θ) at the final marginals.
    pub bound: f64,
    pub rounded: Vec<bool>,
    pub f_rounded: f64,
    /// Ascent steps taken, summed over restarts for multi-start runs.
    pub steps: usize,
}

/// Projected gradient ascent on E(θ) over the unit box, then rounding at ½.
pub fn binary_vo_maximize(
    qp: &BinaryQP,
    init: &BernoulliParams,
    steps: usize,
    step_size: f64,
) -> Result<BinaryVoResult> {
    if steps == 0 {
        return domain("need at least one ascent step");
    }
    if !(step_size > 0.0) || !step_size.is_finite() {
        return domain(format!("step size must be positive, got {step_size}"));
    }
    check_len(qp.dim(), init.theta.len())?;
    check_box(&init.theta)?;

    let mut theta = init.theta.clone();
    let mut taken = 0;
    while taken < steps {
        let (_, grad) = bound_parts(qp, &theta);
        let next = (&theta + grad * step_size).map(|t| t.clamp(0.0, 1.0));
        if next == theta {
            break;
        }
        theta = next;
        taken += 1;
    }
    let (bound, _) = bound_parts(qp, &theta);
    let rounded: Vec<bool> = theta.iter().map(|&t| t >= 0.5).collect();
    let f_rounded = qp.vertex_value(&rounded);
    Ok(BinaryVoResult {
        theta: BernoulliParams { theta },
        bound,
        rounded,
        f_rounded,
        steps: taken,
    })
}

/// Runs [`binary_vo_maximize`] from `restarts` random interior starts at the
/// default step and keeps the run with the best rounded value.
pub fn binary_vo_multistart(
    qp: &BinaryQP,
    restarts: usize,
    steps: usize,
    seed: u64,
) -> Result<BinaryVoResult> {
    if restarts == 0 {
        return domain("need at least one restart");
    }
    let step = qp.default_step();
    let mut best: Option<BinaryVoResult> = None;
    let mut total_steps = 0;
    for r in 0..restarts {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let theta = DVector::from_fn(qp.dim(), |_, _| rng.random::<f64>());
        let run = binary_vo_maximize(qp, &BernoulliParams { theta }, steps, step)?;
        total_steps += run.steps;
        let better = match &best {
            None => true,
            Some(b) => (run.f_rounded, run.bound) > (b.f_rounded, b.bound),
        };
        if better {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    best.steps = total_steps;
    Ok(best)
}

/// Exhaustive maximum of f over {0,1}ᴰ. Ties go to the lexicographically
/// smallest x (comparing x₁ first).
pub fn brute_force_max(qp: &BinaryQP) -> Result<(Vec<bool>, f64)> {
    let d = qp.dim();
    if d > ENUMERATION_LIMIT {
        return Err(VoError::Budget {
            dim: d,
            max: ENUMERATION_LIMIT,
        });
    }
    let a = &qp.a;
    // Gray-code walk: one bit flips per step, and `field[k]` holds
    // Σ_{j≠k}(A_kj + A_jk)xⱼ so the flip changes f by ±(field[k] + b_k + A_kk).
    // Near-best candidates are re-evaluated exactly so ties are decided on
    // reproducible values.
    let scale = 1.0 + a.iter().chain(qp.b.iter()).map(|v| v.abs()).sum::<f64>();
    let slack = 1e-9 * scale;
    let mut x = vec![false; d];
    let mut field = vec![0.0; d];
    let mut running = 0.0;
    let mut best_x = x.clone();
    let mut best = 0.0;
    for step in 1u64..(1u64 << d) {
        let k = step.trailing_zeros() as usize;
        let delta = field[k] + qp.b[k] + a[(k, k)];
        let sign = if x[k] { -1.0 } else { 1.0 };
        running += sign * delta;
        x[k] = !x[k];
        for j in (0..d).filter(|&j| j != k) {
            field[j] += sign * (a[(j, k)] + a[(k, j)]);
        }
        if running >= best - slack {
            let exact = qp.vertex_value(&x);
            if exact > best || (exact == best && x < best_x) {
                best = exact;
                best_x = x.clone();
            }
        }
    }
    Ok((best_x, best))
}
