use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what}: requested {requested} exceeds the limit {limit}")]
    Size { what: &'static str, requested: u128, limit: u128 },

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "power iteration did not converge after {iterations} iterations \
         (estimate {estimate}, relative residual {residual:e})"
    )]
    Convergence { iterations: usize, estimate: f64, residual: f64 },

    #[error("unsupported Δ-rewrite at site {site}: {reason}")]
    UnsupportedRewrite { site: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index pairs are not disjoint: {0}")]
    OverlappingPairs(String),

    #[error("statistical error: {0}")]
    Statistical(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
