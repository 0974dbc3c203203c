use nalgebra::DVector;

use super::{join_point, primal_with, split_point, KernelProblem};
use crate::error::{check_len, domain, Result};
use crate::gauss::{hinge_grad, hinge_mean, INV_SQRT_2PI};
use crate::lasso::positive_root;
use crate::optimize::SmoothedObjective;

/// Means of β and b under the factorized Gaussian, with shared std σ.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub beta_mean: DVector<f64>,
    pub b_mean: f64,
    pub sigma: f64,
}

impl SvmParams {
    pub fn new(beta_mean: DVector<f64>, b_mean: f64, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self {
            beta_mean,
            b_mean,
            sigma,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmBound {
    pub value: f64,
    pub grad_beta: DVector<f64>,
    pub grad_b: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    Ok(())
}

/// Expected primal objective with β ~ N(μ_β, σ²I) and b ~ N(μ_b, σ²):
///
/// ```text
/// E = μ_βᵀKμ_β + σ²·tr(K) + C·Σₙ ⟨max(z, 0)⟩_{N(z | νⁿ, ςⁿ²)}
/// νⁿ = 1 − (Kμ_β)ₙ − μ_b·yⁿ,   ςⁿ = σ·√(1 + Σₘ K_nm²)
/// ```
///
/// The hinge argument's variance collects σ² from b (yⁿ² = 1) and
/// σ²ΣK_nm² from β; b adds no trace term since it enters linearly.
pub fn svm_bound_eval(prob: &KernelProblem, params: &SvmParams) -> Result<SvmBound> {
    check_sigma(params.sigma)?;
    check_len(prob.len(), params.beta_mean.len())?;
    Ok(bound_parts(
        prob,
        &params.beta_mean,
        params.b_mean,
        params.sigma,
    ))
}

fn bound_parts(prob: &KernelProblem, mu: &DVector<f64>, mu_b: f64, sigma: f64) -> SvmBound {
    let k = prob.k();
    let kmu = k * mu;
    let nu = prob.slacks(&kmu, mu_b);
    let n = prob.len();
    let mut hinge = 0.0;
    let mut weights = DVector::zeros(n);
    for i in 0..n {
        let varsigma = sigma * prob.row_scale()[i];
        hinge += hinge_mean(nu[i], varsigma);
        weights[i] = hinge_grad(nu[i], varsigma);
    }
    let c = prob.cost();
    let value = mu.dot(&kmu) + sigma * sigma * k.trace() + c * hinge;
    let grad_beta = kmu * 2.0 - k * &weights * c;
    let grad_b = -c * prob.labels().dot(&weights);
    SvmBound {
        value,
        grad_beta,
        grad_b,
    }
}

/// Gap certificate for the smoothed SVM: gap(σ) = σ²·tr(K) + C·σ·M/√(2π)
/// with M = Σₙ√(1 + Σₘ K_nm²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmGap {
    pub m: f64,
    pub trace_k: f64,
    pub cost: f64,
    /// Positive root of gap(σ) = Δ_f.
    pub sigma_star: f64,
}

impl SvmGap {
    pub fn gap_at(&self, sigma: f64) -> f64 {
        sigma * sigma * self.trace_k + self.cost * sigma * self.m * INV_SQRT_2PI
    }
}

fn gap_coefficients(prob: &KernelProblem) -> (f64, f64, f64) {
    (prob.row_scale().sum(), prob.k().trace(), prob.cost())
}

pub fn svm_gap_and_sigma(prob: &KernelProblem, delta_f: f64) -> Result<SvmGap> {
    if !(delta_f > 0.0) || !delta_f.is_finite() {
        return domain(format!("tolerance must be positive, got {delta_f}"));
    }
    let (m, trace_k, cost) = gap_coefficients(prob);
    let sigma_star = positive_root(trace_k, cost * m * INV_SQRT_2PI, delta_f)?;
    Ok(SvmGap {
        m,
        trace_k,
        cost,
        sigma_star,
    })
}

/// The smoothed SVM bound as an optimizer objective; the smoothing level is σ.
#[derive(Debug, Clone, Copy)]
pub struct SvmVoObjective<'a> {
    pub prob: &'a KernelProblem,
}

impl<'a> SvmVoObjective<'a> {
    pub fn new(prob: &'a KernelProblem) -> Self {
        Self { prob }
    }
}

impl SmoothedObjective for SvmVoObjective<'_> {
    fn dim(&self) -> usize {
        self.prob.len() + 1
    }

    fn eval(&self, point: &DVector<f64>, s: f64) -> Result<(f64, DVector<f64>)> {
        check_sigma(s)?;
        let (beta, b) = split_point(self.prob, point)?;
        let out = bound_parts(self.prob, &beta, b, s);
        Ok((out.value, join_point(&out.grad_beta, out.grad_b)))
    }

    fn objective(&self, point: &DVector<f64>) -> Result<f64> {
        let (beta, b) = split_point(self.prob, point)?;
        let kbeta = self.prob.k() * &beta;
        Ok(primal_with(self.prob, &beta, &kbeta, b))
    }

    fn certificate(&self, s: f64) -> Result<f64> {
        check_sigma(s)?;
        let (m, trace_k, cost) = gap_coefficients(self.prob);
        Ok(s * s * trace_k + cost * s * m * INV_SQRT_2PI)
    }
}
