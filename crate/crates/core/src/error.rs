use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The simplex has no circumscribing ball or is affinely dependent.
    #[error("degenerate simplex: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The point set does not affinely span its ambient space.
    #[error("point set spans an affine space of dimension {rank}, expected {dim}")]
    AffineDeficient { rank: usize, dim: usize },

    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),

    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
