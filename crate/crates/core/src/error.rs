use thiserror::Error;

/// Errors surfaced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// The compact L-BFGS middle matrix could not be inverted.
    #[error("degenerate curvature: middle matrix is numerically singular (pivot {pivot:e})")]
    DegenerateCurvature { pivot: f64 },

    #[error(
        "line search failed at iteration {iteration} after {backtracks} backtracks \
         (delta = {delta:e}, objective = {objective:e})"
    )]
    LineSearchFailed {
        iteration: usize,
        backtracks: usize,
        delta: f64,
        objective: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
