use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polytope: {0}")]
    Polytope(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("convexity lost: {0}")]
    Convexity(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
