//! Kernelized soft-margin SVM in primal form.
//!
//! The weight vector is expanded as w = Σβⁿyⁿφ(xⁿ), which turns the primal
//! into
//!
//! ```text
//! f(β, b) = βᵀKβ + C·Σₙ max(1 − Σₘ K_nm βᵐ − b·yⁿ, 0),   K_nm = yⁿyᵐk(xⁿ, xᵐ)
//! ```
//!
//! Optimizer points are laid out as `[β₁, …, β_N, b]`.

mod bound;
mod huber;
mod smo;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, domain, Result};
use crate::linalg::check_symmetric_psd;

pub use bound::{svm_bound_eval, svm_gap_and_sigma, SvmBound, SvmGap, SvmParams, SvmVoObjective};
pub use huber::{huber_eval, huber_hessian, HuberEval, HuberObjective, HuberSpec};
pub use smo::{smo_reference_solve, SmoSolution};

/// Kernel function k(x, x').
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    /// exp(−γ‖x − x'‖²)
    Rbf {
        gamma: f64,
    },
}

impl Kernel {
    fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Label-signed kernel matrix, labels and cost coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProblem {
    k: DMatrix<f64>,
    labels: DVector<f64>,
    cost: f64,
    /// √(1 + Σₘ K_nm²) per row; scales σ into the hinge-argument std.
    row_scale: DVector<f64>,
}

impl KernelProblem {
    /// Validates a precomputed label-signed kernel.
    pub fn new(k: DMatrix<f64>, labels: DVector<f64>, cost: f64) -> Result<Self> {
        if labels.is_empty() {
            return domain("need at least one training point");
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return domain(format!("labels must be ±1, got {bad}"));
        }
        if !(cost > 0.0) || !cost.is_finite() {
            return domain(format!("cost coefficient must be positive, got {cost}"));
        }
        check_len(labels.len(), k.nrows())?;
        check_symmetric_psd(&k, "K")?;
        Ok(Self::from_parts(k, labels, cost))
    }

    fn from_parts(k: DMatrix<f64>, labels: DVector<f64>, cost: f64) -> Self {
        let row_scale = DVector::from_iterator(
            k.nrows(),
            k.row_iter()
                .map(|r| (1.0 + r.iter().map(|v| v * v).sum::<f64>()).sqrt()),
        );
        Self {
            k,
            labels,
            cost,
            row_scale,
        }
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Same data with a different cost coefficient.
    pub fn with_cost(&self, cost: f64) -> Result<Self> {
        if !(cost >= 0.0) || !cost.is_finite() {
            return domain(format!("cost coefficient must be non-negative, got {cost}"));
        }
        let mut out = self.clone();
        out.cost = cost;
        Ok(out)
    }

    pub(crate) fn row_scale(&self) -> &DVector<f64> {
        &self.row_scale
    }

    /// Hinge arguments ξⁿ = 1 − (Kβ)ₙ − b·yⁿ.
    pub(crate) fn slacks(&self, kbeta: &DVector<f64>, b: f64) -> DVector<f64> {
        DVector::from_fn(self.len(), |n, _| 1.0 - kbeta[n] - b * self.labels[n])
    }

    /// Fraction of points with yⁿ(wᵀφ(xⁿ) + b) < 0, i.e. (Kβ)ₙ + b·yⁿ < 0.
    pub fn training_error(&self, beta: &DVector<f64>, b: f64) -> Result<f64> {
        check_len(self.len(), beta.len())?;
        let kbeta = &self.k * beta;
        let wrong = (0..self.len())
            .filter(|&n| kbeta[n] + b * self.labels[n] < 0.0)
            .count();
        Ok(wrong as f64 / self.len() as f64)
    }
}

/// Builds K_nm = yⁿyᵐk(xⁿ, xᵐ) from row-major points.
pub fn build_kernel(
    points: &DMatrix<f64>,
    labels: &DVector<f64>,
    kernel: Kernel,
    cost: f64,
) -> Result<KernelProblem> {
    if let Kernel::Rbf { gamma } = kernel {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return domain(format!("rbf gamma must be positive, got {gamma}"));
        }
    }
    check_len(points.nrows(), labels.len())?;
    if points.iter().any(|v| !v.is_finite()) {
        return domain("points must be finite");
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return domain(format!("labels must be ±1, got {bad}"));
    }
    let n = points.nrows();
    let rows: Vec<Vec<f64>> = points
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = labels[i] * labels[j] * kernel.eval(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    KernelProblem::new(k, labels.clone(), cost)
}

/// βᵀKβ + C·Σₙ max(1 − (Kβ)ₙ − b·yⁿ, 0).
pub fn svm_primal_value(prob: &KernelProblem, beta: &DVector<f64>, b: f64) -> Result<f64> {
    check_len(prob.len(), beta.len())?;
    let kbeta = &prob.k * beta;
    Ok(primal_with(prob, beta, &kbeta, b))
}

pub(crate) fn primal_with(
    prob: &KernelProblem,
    beta: &DVector<f64>,
    kbeta: &DVector<f64>,
    b: f64,
) -> f64 {
    let hinge: f64 = prob.slacks(kbeta, b).iter().map(|xi| xi.max(0.0)).sum();
    beta.dot(kbeta) + prob.cost * hinge
}

pub(crate) fn split_point(
    prob: &KernelProblem,
    point: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    check_len(prob.len() + 1, point.len())?;
    let n = prob.len();
    Ok((point.rows(0, n).into_owned(), point[n]))
}

pub(crate) fn join_point(beta: &DVector<f64>, b: f64) -> DVector<f64> {
    let n = beta.len();
    DVector::from_fn(n + 1, |i, _| if i < n { beta[i] } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn identical_points_give_rank_one_kernel() {
        let pts = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let p = build_kernel(&pts, &v(&[1.0, 1.0]), Kernel::Linear, 1.0).unwrap();
        assert_eq!(p.k(), &DMatrix::from_element(2, 2, 5.0));
    }

    #[test]
    fn rbf_sign_follows_labels() {
        let pts = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        let p = build_kernel(&pts, &v(&[1.0, -1.0]), Kernel::Rbf { gamma: 0.3 }, 1.0).unwrap();
        assert!((p.k()[(0, 1)] + (-0.3f64 * 4.0).exp()).abs() < 1e-16);
        assert_eq!(p.k()[(0, 0)], 1.0);
    }

    #[test]
    fn build_kernel_errors() {
        let pts = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        assert!(build_kernel(&pts, &v(&[1.0, 0.0]), Kernel::Linear, 1.0).is_err());
        assert!(build_kernel(&pts, &v(&[1.0, -1.0]), Kernel::Rbf { gamma: 0.0 }, 1.0).is_err());
        assert!(build_kernel(&pts, &v(&[1.0, -1.0]), Kernel::Linear, 0.0).is_err());
        assert!(build_kernel(&pts, &v(&[1.0]), Kernel::Linear, 1.0).is_err());
    }

    #[test]
    fn primal_examples() {
        let pts = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 1.0, -1.0, 2.0]);
        let p = build_kernel(&pts, &v(&[1.0, 1.0, 1.0]), Kernel::Linear, 2.5).unwrap();
        let zero = DVector::zeros(3);
        assert_eq!(svm_primal_value(&p, &zero, 0.0).unwrap(), 2.5 * 3.0);
        assert_eq!(svm_primal_value(&p, &zero, 10.0).unwrap(), 0.0);
        assert!(svm_primal_value(&p, &DVector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn point_layout_round_trip() {
        let pts = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        let p = build_kernel(&pts, &v(&[1.0, -1.0]), Kernel::Linear, 1.0).unwrap();
        let x = join_point(&v(&[0.5, -0.25]), 3.0);
        assert_eq!(x, v(&[0.5, -0.25, 3.0]));
        let (beta, b) = split_point(&p, &x).unwrap();
        assert_eq!((beta, b), (v(&[0.5, -0.25]), 3.0));
    }
}
