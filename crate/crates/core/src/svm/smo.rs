use nalgebra::DVector;

use super::{primal_with, KernelProblem};
use crate::error::{domain, Result, VoError};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub beta: DVector<f64>,
    pub b: f64,
    pub primal: f64,
    pub iterations: usize,
}

/// Reference optimum by sequential minimal optimization on the dual.
///
/// The primal βᵀKβ + C·Σhinge is twice the textbook ½‖w‖² + (C/2)·Σhinge,
/// so the dual is the usual
///
/// ```text
/// min ½αᵀKα − Σα   s.t.  0 ≤ α ≤ C/2,  Σ αₙyₙ = 0
/// ```
///
/// with β = α. Pairs are chosen as the maximal KKT violators and updated in
/// closed form; iteration stops once the violation gap drops below `tol`.
/// The bias is then re-optimized exactly over the hinge breakpoints.
pub fn smo_reference_solve(prob: &KernelProblem, tol: f64) -> Result<SmoSolution> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let n = prob.len();
    let k = prob.k();
    let y = prob.labels();
    let upper = prob.cost() / 2.0;
    let scale = k.amax().max(1.0);
    let max_iter = 10_000_000usize.max(100 * n);

    let mut alpha: DVector<f64> = DVector::zeros(n);
    // gradient of the dual objective, Kα − 1
    let mut grad: DVector<f64> = DVector::from_element(n, -1.0);
    let in_up = |a: f64, y: f64| (y > 0.0 && a < upper) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < upper);

    let mut iterations = 0;
    loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(VoError::NoConvergence(max_iter));
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let (kii, kjj, kij) = (k[(i, i)], k[(j, j)], k[(i, j)]);
        if y[i] != y[j] {
            let quad = pair_curvature(kii + kjj + 2.0 * kij, scale)?;
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > upper {
                    alpha[i] = upper;
                    alpha[j] = upper - diff;
                }
            } else if alpha[j] > upper {
                alpha[j] = upper;
                alpha[i] = upper + diff;
            }
        } else {
            let quad = pair_curvature(kii + kjj - 2.0 * kij, scale)?;
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > upper {
                if alpha[i] > upper {
                    alpha[i] = upper;
                    alpha[j] = sum - upper;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > upper {
                if alpha[j] > upper {
                    alpha[j] = upper;
                    alpha[i] = sum - upper;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        grad.axpy(di, &k.column(i), 1.0);
        grad.axpy(dj, &k.column(j), 1.0);
    }

    let beta = alpha;
    let kbeta = k * &beta;
    let b_kkt = kkt_bias(&beta, &grad, y, upper);
    let b_opt = best_bias(prob, &kbeta);
    let f_kkt = primal_with(prob, &beta, &kbeta, b_kkt);
    let f_opt = primal_with(prob, &beta, &kbeta, b_opt);
    let (b, primal) = if f_opt < f_kkt {
        (b_opt, f_opt)
    } else {
        (b_kkt, f_kkt)
    };
    Ok(SmoSolution {
        beta,
        b,
        primal,
        iterations,
    })
}

fn pair_curvature(quad: f64, scale: f64) -> Result<f64> {
    if quad < -1e-10 * scale {
        return Err(VoError::Solver(format!(
            "kernel is not positive semidefinite (pair curvature {quad:e})"
        )));
    }
    Ok(if quad <= 0.0 { TAU } else { quad })
}

/// Bias from the KKT conditions: the mean of −yₜ∇ₜ over free variables, or
/// the midpoint of the feasible interval when none are free.
fn kkt_bias(alpha: &DVector<f64>, grad: &DVector<f64>, y: &DVector<f64>, upper: f64) -> f64 {
    let mut sum = 0.0;
    let mut free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < upper {
            sum += yg;
            free += 1;
        } else if (alpha[t] >= upper && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    };
    -rho
}

/// Exact minimizer over b of Σₙ max(1 − (Kβ)ₙ − b·yⁿ, 0). The sum is convex
/// and piecewise linear, so some breakpoint b = (1 − (Kβ)ₙ)·yⁿ attains it.
fn best_bias(prob: &KernelProblem, kbeta: &DVector<f64>) -> f64 {
    let y = prob.labels();
    let hinge = |b: f64| -> f64 {
        (0..y.len())
            .map(|n| (1.0 - kbeta[n] - b * y[n]).max(0.0))
            .sum()
    };
    let mut best_b = 0.0f64;
    let mut best = f64::INFINITY;
    for n in 0..y.len() {
        let b = (1.0 - kbeta[n]) * y[n];
        let v = hinge(b);
        if v < best || (v == best && b.abs() < best_b.abs()) {
            best = v;
            best_b = b;
        }
    }
    best_b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::{build_kernel, Kernel};
    use nalgebra::DMatrix;

    #[test]
    fn two_separable_points() {
        let pts = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let labels = DVector::from_column_slice(&[1.0, -1.0]);
        let prob = build_kernel(&pts, &labels, Kernel::Linear, 10.0).unwrap();
        let sol = smo_reference_solve(&prob, 1e-9).unwrap();
        // w = (1, 0), b = 0: ‖w‖² = 1 with both points on the margin
        assert!((sol.primal - 1.0).abs() < 1e-9);
        assert!((sol.beta[0] - 0.5).abs() < 1e-9 && (sol.beta[1] - 0.5).abs() < 1e-9);
        assert!(sol.b.abs() < 1e-9);
    }

    #[test]
    fn identical_labels_need_only_bias() {
        let pts = DMatrix::from_row_slice(3, 1, &[0.5, -1.0, 2.0]);
        let labels = DVector::from_element(3, 1.0);
        let prob = build_kernel(&pts, &labels, Kernel::Linear, 4.0).unwrap();
        let sol = smo_reference_solve(&prob, 1e-8).unwrap();
        assert_eq!(sol.beta, DVector::zeros(3));
        assert_eq!(sol.primal, 0.0);
        assert!(prob.training_error(&sol.beta, sol.b).unwrap() == 0.0);
    }

    #[test]
    fn indefinite_kernel_is_reported() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -3.0, -3.0, 1.0]);
        let labels = DVector::from_column_slice(&[1.0, -1.0]);
        assert!(KernelProblem::new(k.clone(), labels.clone(), 1.0).is_err());
        // opposite labels give pair curvature 1 + 1 + 2·(−3) < 0
        let prob = KernelProblem::from_parts(k, labels, 1.0);
        assert!(matches!(
            smo_reference_solve(&prob, 1e-6),
            Err(VoError::Solver(_))
        ));
    }

    #[test]
    fn best_bias_minimizes_hinge_sum() {
        let pts = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, -1.0, -0.5]);
        let labels = DVector::from_column_slice(&[1.0, 1.0, -1.0, -1.0]);
        let prob = build_kernel(&pts, &labels, Kernel::Linear, 1.0).unwrap();
        let beta = DVector::from_column_slice(&[0.1, 0.0, 0.2, 0.0]);
        let kbeta = prob.k() * &beta;
        let b = best_bias(&prob, &kbeta);
        let at = |b: f64| primal_with(&prob, &beta, &kbeta, b);
        for i in -400..400 {
            assert!(at(b) <= at(i as f64 * 0.01) + 1e-12);
        }
    }
}
