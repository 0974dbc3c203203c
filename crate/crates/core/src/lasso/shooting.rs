use nalgebra::DVector;

use super::LassoSpec;
use crate::error::{domain, Result, VoError};

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Stop once the largest coordinate change in a sweep is below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingRun {
    pub w: DVector<f64>,
    pub sweeps: usize,
}

/// Cyclic coordinate descent for the standard lasso with closed-form
/// soft-threshold updates, starting from zero.
pub fn shooting_solve(spec: &LassoSpec, tol: f64) -> Result<DVector<f64>> {
    let opts = ShootingOptions {
        tol,
        ..ShootingOptions::default()
    };
    Ok(shooting_solve_with(spec, opts)?.w)
}

pub fn shooting_solve_with(spec: &LassoSpec, opts: ShootingOptions) -> Result<ShootingRun> {
    if spec.is_fused() {
        return Err(VoError::Unsupported(
            "shooting handles the standard lasso only (λ₂ = 0)".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return domain(format!("tolerance must be positive, got {}", opts.tol));
    }
    let a = spec.quad.a();
    let b = spec.quad.b();
    let d = spec.dim();
    if let Some(index) = (0..d).find(|&i| !(a[(i, i)] > 0.0)) {
        return Err(VoError::DegenerateCoordinate {
            index,
            value: a[(index, index)],
        });
    }

    let mut w = DVector::zeros(d);
    for sweep in 1..=opts.max_sweeps {
        // refresh A·w every sweep so rounding drift never accumulates
        let mut aw = a * &w;
        let mut max_change: f64 = 0.0;
        for i in 0..d {
            let aii = a[(i, i)];
            let old = w[i];
            // linear coefficient of wᵢ with the others held fixed
            let r = b[i] + 2.0 * (aw[i] - aii * old);
            let new = -soft_threshold(r, spec.lambda1) / (2.0 * aii);
            let delta = new - old;
            if delta != 0.0 {
                aw.axpy(delta, &a.column(i), 1.0);
                w[i] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < opts.tol {
            return Ok(ShootingRun { w, sweeps: sweep });
        }
    }
    Err(VoError::NoConvergence(opts.max_sweeps))
}

/// sign(r)·max(|r| − λ, 0); exactly zero when |r| ≤ λ.
pub(crate) fn soft_threshold(r: f64, lambda: f64) -> f64 {
    if r > lambda {
        r - lambda
    } else if r < -lambda {
        r + lambda
    } else {
        0.0
    }
}
