use thiserror::Error;

use crate::optimize::RunReport;

/// Errors raised by the smoothed objectives, solvers and harness.
#[derive(Debug, Error)]
pub enum VoError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate coordinate {index}: diagonal entry is {value}")]
    DegenerateCoordinate { index: usize, value: f64 },

    #[error("non-positive curvature {value} at coordinate {index} (iteration {iteration})")]
    Curvature {
        index: usize,
        value: f64,
        iteration: usize,
    },

    #[error("line search stalled at iteration {}", report.iterations)]
    Stalled { report: Box<RunReport> },

    #[error("enumeration budget exceeded: dimension {dim} > {max}")]
    Budget { dim: usize, max: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("did not converge within {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T, E = VoError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(VoError::Domain(msg.into()))
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(VoError::Dimension { expected, got });
    }
    Ok(())
}
