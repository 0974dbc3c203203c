use nalgebra::{DMatrix, DVector};

use super::{join_point, split_point, KernelProblem};
use crate::error::{check_len, domain, Result};
use crate::optimize::SmoothedObjective;

/// Half-width of the quadratic section of the Huber-smoothed hinge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberSpec {
    pub h: f64,
}

impl HuberSpec {
    pub fn new(h: f64) -> Result<Self> {
        check_h(h)?;
        Ok(Self { h })
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("Huber half-width must be positive, got {h}"));
    }
    Ok(())
}

/// Huber-smoothed hinge: (ξ + h)²/(4h) for |ξ| < h, max(ξ, 0) otherwise.
/// Continuous with continuous slope, and never below the hinge.
#[inline]
fn loss(xi: f64, h: f64) -> f64 {
    if xi.abs() < h {
        (xi + h) * (xi + h) / (4.0 * h)
    } else {
        xi.max(0.0)
    }
}

#[inline]
fn loss_slope(xi: f64, h: f64) -> f64 {
    if xi.abs() < h {
        (xi + h) / (2.0 * h)
    } else if xi > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuberEval {
    pub value: f64,
    pub grad_beta: DVector<f64>,
    pub grad_b: f64,
}

/// βᵀKβ + C·Σₙ L_h(ξⁿ) with ξⁿ = 1 − (Kβ)ₙ − b·yⁿ, and its gradient.
pub fn huber_eval(
    prob: &KernelProblem,
    spec: &HuberSpec,
    beta: &DVector<f64>,
    b: f64,
) -> Result<HuberEval> {
    check_h(spec.h)?;
    check_len(prob.len(), beta.len())?;
    Ok(huber_parts(prob, spec.h, beta, b))
}

fn huber_parts(prob: &KernelProblem, h: f64, beta: &DVector<f64>, b: f64) -> HuberEval {
    let k = prob.k();
    let kbeta = k * beta;
    let xi = prob.slacks(&kbeta, b);
    let c = prob.cost();
    let total: f64 = xi.iter().map(|&x| loss(x, h)).sum();
    let slopes = xi.map(|x| loss_slope(x, h));
    let value = beta.dot(&kbeta) + c * total;
    let grad_beta = kbeta * 2.0 - k * &slopes * c;
    let grad_b = -c * prob.labels().dot(&slopes);
    HuberEval {
        value,
        grad_beta,
        grad_b,
    }
}

/// Exact Hessian of the Huber objective in the `[β, b]` layout:
///
/// ```text
/// ∂²/∂β²  = 2K + (C/2h)·K·Iq·K
/// ∂²/∂β∂b = (C/2h)·K·Iq·y
/// ∂²/∂b²  = (C/2h)·yᵀ·Iq·y
/// ```
///
/// where Iq flags points inside the quadratic section |ξⁿ| < h. When no
/// point is inside, every entry involving b vanishes and the matrix is
/// singular, so a plain Newton step cannot be formed.
pub fn huber_hessian(
    prob: &KernelProblem,
    spec: &HuberSpec,
    beta: &DVector<f64>,
    b: f64,
) -> Result<DMatrix<f64>> {
    check_h(spec.h)?;
    check_len(prob.len(), beta.len())?;
    let n = prob.len();
    let k = prob.k();
    let xi = prob.slacks(&(k * beta), b);
    let scale = prob.cost() / (2.0 * spec.h);
    let mut hess = DMatrix::zeros(n + 1, n + 1);
    hess.view_mut((0, 0), (n, n)).copy_from(&(k * 2.0));
    let y = prob.labels();
    for p in (0..n).filter(|&p| xi[p].abs() < spec.h) {
        let col = k.column(p);
        for i in 0..n {
            for j in 0..n {
                hess[(i, j)] += scale * col[i] * col[j];
            }
            hess[(i, n)] += scale * col[i] * y[p];
            hess[(n, i)] += scale * col[i] * y[p];
        }
        hess[(n, n)] += scale * y[p] * y[p];
    }
    Ok(hess)
}

/// The Huber objective as an optimizer objective; the smoothing level is h.
#[derive(Debug, Clone, Copy)]
pub struct HuberObjective<'a> {
    pub prob: &'a KernelProblem,
}

impl<'a> HuberObjective<'a> {
    pub fn new(prob: &'a KernelProblem) -> Self {
        Self { prob }
    }
}

impl SmoothedObjective for HuberObjective<'_> {
    fn dim(&self) -> usize {
        self.prob.len() + 1
    }

    fn eval(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>)> {
        check_h(s)?;
        let (beta, b) = split_point(self.prob, point)?;
        let out = huber_parts(self.prob, s, &beta, b);
        Ok((out.value, join_point(&out.grad_beta, out.grad_b)))
    }

    fn objective(&self, point: &DVector<f64>) -> Result<f64> {
        let (beta, b) = split_point(self.prob, point)?;
        super::svm_primal_value(self.prob, &beta, b)
    }

    /// Each point's loss exceeds the hinge by at most h/4 (at ξ = 0).
    fn certificate(&self, s: f64) -> Result<f64> {
        check_h(s)?;
        Ok(self.prob.cost() * self.prob.len() as f64 * s / 4.0)
    }
}
