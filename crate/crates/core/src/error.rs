use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension {dim} exceeds the dense limit {limit}; use the extremal-only path")]
    TooLarge { dim: usize, limit: usize },

    #[error("singular preconditioner block at frequency {index:?}")]
    SingularBlock { index: Vec<usize> },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("breakdown: {0}")]
    Breakdown(String),

    #[error("iteration diverged after {iterations} steps")]
    Divergence { iterations: usize },

    #[error("zero order ambiguous: fitted slope {slope:.4}")]
    AmbiguousOrder { slope: f64 },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
