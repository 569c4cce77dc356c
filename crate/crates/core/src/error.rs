use thiserror::Error;

/// Errors raised by the hull engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regularity error: {0}")]
    Regularity(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("radial convexity fails: {0}")]
    Convexity(String),

    #[error("normalization condition has no bracket: {0}")]
    InfeasibleNormalization(String),

    #[error("matrix is not regular (rank {rank} < {cols})")]
    Rank { rank: usize, cols: usize },

    #[error("ill-conditioned metric (condition number {0:.3e})")]
    Conditioning(f64),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("fold: triangle {triangle} has non-positive Jacobian {det:.3e}")]
    Fold { triangle: usize, det: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for HullError {
    fn from(e: std::io::Error) -> Self {
        HullError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HullError>;
