use nalgebra::DMatrix;

use crate::error::{domain, Result};

/// Checks that `m` is square, finite, symmetric to 1e-12 relative and
/// positive semidefinite with tolerance −1e-10·trace.
pub(crate) fn check_symmetric_psd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return domain(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return domain(format!("{name} has non-finite entries"));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return domain(format!("{name} is not symmetric at ({i}, {j})"));
            }
        }
    }
    let trace = m.trace();
    let sym = (m + m.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig < -1e-10 * trace.abs() {
        return domain(format!(
            "{name} is not positive semidefinite (min eigenvalue {min_eig:e}, trace {trace:e})"
        ));
    }
    Ok(())
}
