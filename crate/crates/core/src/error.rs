use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("epsilon = {0} lies outside the admissible interval (0, 2)")]
    InvalidEpsilon(f64),

    #[error("matrix order must be at least 1")]
    InvalidOrder,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "QR iteration did not converge within {sweeps} sweeps \
         ({deflated} eigenvalues deflated, {remaining} remaining)"
    )]
    NoConvergence {
        sweeps: usize,
        deflated: usize,
        remaining: usize,
    },

    #[error("matrix is numerically singular at this truncation")]
    Singular,

    #[error("right-hand side has mean {mean:e}; constants are not in the range of L")]
    Unsolvable { mean: f64 },

    #[error("a posteriori residual {residual:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure { residual: f64, tolerance: f64 },

    #[error("eigenvector matrix condition number {condition:e} exceeds {limit:e}")]
    EigendecompositionIllConditioned { condition: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
