use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("scheme mismatch: symbol belongs to `{symbol}`, scheme is `{scheme}`")]
    SchemeMismatch { symbol: String, scheme: String },

    #[error("ill-posed direction set at L = {l}: condition number {cond:e}")]
    IllPosedDirections { l: usize, cond: f64 },

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("projector set failed verification: {0}")]
    Unverified(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("IO error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
