use nalgebra::DVector;

use super::{lasso_value, LassoSpec};
use crate::error::{domain, Result};

/// Outcome of the subgradient reference solver.
#[derive(Debug, Clone)]
pub struct SubgradientRun {
    /// Best iterate seen.
    pub w: DVector<f64>,
    pub objective: f64,
    /// Best objective so far after each iteration.
    pub best_trace: Vec<f64>,
}

/// Plain subgradient descent on the (fused) lasso objective with step
/// 1/(L·√t), L = 2‖A‖∞ + λ₁ + 2λ₂, starting from zero and returning the best
/// iterate. Slow but simple enough to serve as an independent cross-check.
pub fn fused_reference_solve(spec: &LassoSpec, iters: usize) -> Result<SubgradientRun> {
    if iters == 0 {
        return domain("need at least one iteration");
    }
    let a = spec.quad.a();
    let b = spec.quad.b();
    let d = spec.dim();
    let a_inf = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lipschitz = 2.0 * a_inf + spec.lambda1 + 2.0 * spec.lambda2;
    if !(lipschitz > 0.0) {
        // zero objective apart from the constant
        let w = DVector::zeros(d);
        let objective = lasso_value(spec, &w)?;
        return Ok(SubgradientRun {
            w,
            objective,
            best_trace: vec![objective; iters],
        });
    }

    let mut w = DVector::zeros(d);
    let mut best_w = w.clone();
    let mut best = lasso_value(spec, &w)?;
    let mut best_trace = Vec::with_capacity(iters);
    for t in 1..=iters {
        let mut g = b + a * &w * 2.0;
        for i in 0..d {
            g[i] += spec.lambda1 * sign(w[i]);
        }
        if spec.lambda2 > 0.0 {
            for i in 1..d {
                let s = spec.lambda2 * sign(w[i] - w[i - 1]);
                g[i] += s;
                g[i - 1] -= s;
            }
        }
        let step = 1.0 / (lipschitz * (t as f64).sqrt());
        w.axpy(-step, &g, 1.0);
        let f = lasso_value(spec, &w)?;
        if f < best {
            best = f;
            best_w.copy_from(&w);
        }
        best_trace.push(best);
    }
    Ok(SubgradientRun {
        w: best_w,
        objective: best,
        best_trace,
    })
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::QuadraticForm;
    use nalgebra::DMatrix;

    #[test]
    fn smooth_case_reaches_least_squares() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = DVector::from_column_slice(&[-3.0, 1.0]);
        let quad = QuadraticForm::new(5.0, b.clone(), a.clone()).unwrap();
        let spec = LassoSpec::new(quad.clone(), 0.0, 0.0).unwrap();
        let run = fused_reference_solve(&spec, 100_000).unwrap();
        let exact = a.lu().solve(&(&b * -0.5)).unwrap();
        let f_star = quad.eval(&exact).unwrap();
        assert!((run.objective - f_star).abs() <= 1e-3 * f_star.abs());
    }

    #[test]
    fn best_trace_is_monotone() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 1.5]);
        let quad =
            QuadraticForm::new(1.0, DVector::from_column_slice(&[-3.0, 1.0, 2.0]), a).unwrap();
        let spec = LassoSpec::new(quad, 0.5, 0.7).unwrap();
        let run = fused_reference_solve(&spec, 500).unwrap();
        assert_eq!(run.best_trace.len(), 500);
        assert!(run.best_trace.windows(2).all(|p| p[1] <= p[0]));
        assert_eq!(*run.best_trace.last().unwrap(), run.objective);
        assert_eq!(lasso_value(&spec, &run.w).unwrap(), run.objective);
    }

    #[test]
    fn zero_iterations_rejected() {
        let quad = QuadraticForm::new(0.0, DVector::zeros(1), DMatrix::identity(1, 1)).unwrap();
        let spec = LassoSpec::new(quad, 0.0, 0.0).unwrap();
        assert!(fused_reference_solve(&spec, 0).is_err());
    }
}
