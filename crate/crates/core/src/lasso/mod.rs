//! Standard and fused lasso: objective, Gaussian-smoothed upper bound,
//! gap certificate and reference solvers.
//!
//! The squared loss is kept in expanded form `c + wᵀb + wᵀAw`, so the data
//! enter only through a [`QuadraticForm`].

mod shooting;
mod subgradient;

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, domain, Result};
use crate::gauss::{abs_grad, abs_hess, abs_mean, INV_SQRT_2PI};
use crate::linalg::check_symmetric_psd;
use crate::optimize::{DiagCurvature, SmoothedObjective};

pub use shooting::{shooting_solve, shooting_solve_with, ShootingOptions, ShootingRun};
pub use subgradient::{fused_reference_solve, SubgradientRun};

/// Squared-loss summary `(c, b, A)` with c = Σ(yⁿ)², b = −2Σyⁿxⁿ,
/// A = Σxⁿxⁿᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    c: f64,
    b: DVector<f64>,
    a: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(c: f64, b: DVector<f64>, a: DMatrix<f64>) -> Result<Self> {
        if !c.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return domain("quadratic form has non-finite entries");
        }
        if b.is_empty() {
            return domain("quadratic form needs at least one dimension");
        }
        check_len(b.len(), a.nrows())?;
        check_symmetric_psd(&a, "A")?;
        Ok(Self { c, b, a })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `c + wᵀb + wᵀAw`.
    pub fn eval(&self, w: &DVector<f64>) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        Ok(self.eval_with(w, &(&self.a * w)))
    }

    fn eval_with(&self, w: &DVector<f64>, aw: &DVector<f64>) -> f64 {
        self.c + w.dot(&self.b) + w.dot(aw)
    }
}

/// Expands the residual sum of squares of `targets ≈ inputs · w`.
pub fn build_quadratic(inputs: &DMatrix<f64>, targets: &DVector<f64>) -> Result<QuadraticForm> {
    if inputs.nrows() == 0 || inputs.ncols() == 0 {
        return domain("need at least one row and one column of inputs");
    }
    check_len(inputs.nrows(), targets.len())?;
    if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return domain("inputs and targets must be finite");
    }
    let c = targets.dot(targets);
    let b = inputs.tr_mul(targets) * -2.0;
    let a = inputs.tr_mul(inputs);
    QuadraticForm::new(c, b, a)
}

/// Variational mean and isotropic standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub mu: DVector<f64>,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(mu: DVector<f64>, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if mu.iter().any(|v| !v.is_finite()) {
            return domain("variational mean must be finite");
        }
        Ok(Self { mu, sigma })
    }
}

/// A lasso problem; `lambda2 = 0` is the standard lasso, `lambda2 > 0` adds
/// the fused penalty `λ₂Σ|wᵢ − wᵢ₋₁|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoSpec {
    pub quad: QuadraticForm,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LassoSpec {
    pub fn new(quad: QuadraticForm, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 >= 0.0 && lambda1.is_finite()) || !(lambda2 >= 0.0 && lambda2.is_finite()) {
            return domain(format!(
                "regularizers must be finite and non-negative, got ({lambda1}, {lambda2})"
            ));
        }
        Ok(Self {
            quad,
            lambda1,
            lambda2,
        })
    }

    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn is_fused(&self) -> bool {
        self.lambda2 > 0.0
    }
}

/// Value, gradient and Hessian diagonal of the smoothed bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoBound {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess_diag: DVector<f64>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    Ok(())
}

fn penalties(spec: &LassoSpec, w: &DVector<f64>) -> (f64, f64) {
    let l1 = w.iter().map(|v| v.abs()).sum::<f64>();
    let tv = w
        .as_slice()
        .windows(2)
        .map(|p| (p[1] - p[0]).abs())
        .sum::<f64>();
    (spec.lambda1 * l1, spec.lambda2 * tv)
}

/// `c + wᵀb + wᵀAw + λ₁Σ|wᵢ| + λ₂Σ|wᵢ − wᵢ₋₁|`.
pub fn lasso_value(spec: &LassoSpec, w: &DVector<f64>) -> Result<f64> {
    let quad = spec.quad.eval(w)?;
    let (l1, tv) = penalties(spec, w);
    Ok(quad + l1 + tv)
}

/// Expectation of the (fused) lasso objective under N(μ, σ²I).
///
/// The fused term for the pair (i−1, i) is the smoothed absolute value of
/// μᵢ − μᵢ₋₁ with standard deviation √2·σ; its curvature enters the
/// Hessian diagonal at both coordinates.
pub fn lasso_bound_eval(spec: &LassoSpec, params: &GaussianParams) -> Result<LassoBound> {
    check_sigma(params.sigma)?;
    check_len(spec.dim(), params.mu.len())?;
    Ok(bound_parts(spec, &params.mu, params.sigma))
}

fn bound_parts(spec: &LassoSpec, mu: &DVector<f64>, sigma: f64) -> LassoBound {
    let q = &spec.quad;
    let aw = &q.a * mu;
    let mut grad = &q.b + &aw * 2.0;
    let mut hess_diag = q.a.diagonal() * 2.0;

    let mut l1 = 0.0;
    if spec.lambda1 > 0.0 {
        for (i, &m) in mu.iter().enumerate() {
            l1 += abs_mean(m, sigma);
            grad[i] += spec.lambda1 * abs_grad(m, sigma);
            hess_diag[i] += spec.lambda1 * abs_hess(m, sigma);
        }
    }
    let mut tv = 0.0;
    if spec.lambda2 > 0.0 {
        let pair_sigma = SQRT_2 * sigma;
        for i in 1..mu.len() {
            let d = mu[i] - mu[i - 1];
            tv += abs_mean(d, pair_sigma);
            let g = spec.lambda2 * abs_grad(d, pair_sigma);
            let h = spec.lambda2 * abs_hess(d, pair_sigma);
            grad[i] += g;
            grad[i - 1] -= g;
            hess_diag[i] += h;
            hess_diag[i - 1] += h;
        }
    }
    let value =
        q.eval_with(mu, &aw) + sigma * sigma * q.a.trace() + spec.lambda1 * l1 + spec.lambda2 * tv;
    LassoBound {
        value,
        grad,
        hess_diag,
    }
}

/// Largest possible bound-minus-objective at smoothing σ:
/// σ²·tr(A) + 2λ₁Dσ/√(2π) + 2λ₂(D−1)·√2σ/√(2π).
///
/// The fused part adds each pairwise term's own peak, which is attained at
/// μᵢ = μᵢ₋₁; neighbouring pairs share coordinates, so the sum is an upper
/// bound rather than always attained.
pub fn lasso_gap_max(spec: &LassoSpec, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let d = spec.dim() as f64;
    let quad = sigma * sigma * spec.quad.a.trace();
    let l1 = 2.0 * spec.lambda1 * d * sigma * INV_SQRT_2PI;
    let tv = 2.0 * spec.lambda2 * (d - 1.0) * SQRT_2 * sigma * INV_SQRT_2PI;
    Ok(quad + l1 + tv)
}

/// Positive root σ* of σ²·tr(A) + (2λ₁D/√(2π))·σ = Δ_f, the largest σ for
/// which the standard-lasso gap certificate is at most Δ_f.
pub fn sigma_for_tolerance(spec: &LassoSpec, delta_f: f64) -> Result<f64> {
    if spec.is_fused() {
        return Err(crate::error::VoError::Unsupported(
            "σ tolerance is only available for the standard lasso (λ₂ = 0)".into(),
        ));
    }
    if !(delta_f > 0.0) || !delta_f.is_finite() {
        return domain(format!("tolerance must be positive, got {delta_f}"));
    }
    let quad = spec.quad.a.trace();
    let lin = 2.0 * spec.lambda1 * spec.dim() as f64 * INV_SQRT_2PI;
    positive_root(quad, lin, delta_f)
}

/// Positive root of `a·x² + b·x = c` for a, b ≥ 0 (not both zero), c > 0,
/// in the cancellation-free form 2c / (b + √(b² + 4ac)).
pub(crate) fn positive_root(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) || (a == 0.0 && b == 0.0) {
        return domain(format!(
            "gap has no σ dependence (quadratic {a}, linear {b}); any σ satisfies the tolerance"
        ));
    }
    Ok(2.0 * c / (b + (b * b + 4.0 * a * c).sqrt()))
}

/// Adapter exposing a lasso spec to the optimizers, with σ as the
/// smoothing level.
#[derive(Debug, Clone, Copy)]
pub struct LassoObjective<'a> {
    pub spec: &'a LassoSpec,
}

impl<'a> LassoObjective<'a> {
    pub fn new(spec: &'a LassoSpec) -> Self {
        Self { spec }
    }
}

impl SmoothedObjective for LassoObjective<'_> {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn eval(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>)> {
        check_sigma(s)?;
        check_len(self.dim(), point.len())?;
        let b = bound_parts(self.spec, point, s);
        Ok((b.value, b.grad))
    }

    fn objective(&self, point: &DVector<f64>) -> Result<f64> {
        lasso_value(self.spec, point)
    }

    fn certificate(&self, s: f64) -> Result<f64> {
        lasso_gap_max(self.spec, s)
    }
}

impl DiagCurvature for LassoObjective<'_> {
    fn eval_diag(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>, DVector<f64>)> {
        check_sigma(s)?;
        check_len(self.dim(), point.len())?;
        let b = bound_parts(self.spec, point, s);
        Ok((b.value, b.grad, b.hess_diag))
    }
}
