use thiserror::Error;

/// Errors produced by the library. Mathematical failures (a hypothesis that
/// does not hold on a concrete instance) are reported inside verdicts, not
/// as errors; these variants cover structural misuse and numerical faults.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row},{col}): {value}")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("matrix is singular to tolerance: smallest singular value {sigma:.3e}")]
    Singular { sigma: f64 },

    #[error("eigensolve did not converge within {iterations} iterations (partial radius {partial:.6e})")]
    NonConvergence { iterations: usize, partial: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("splitting strategy error: {0}")]
    Strategy(String),

    #[error("inconsistent splitting: {0}")]
    Consistency(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
