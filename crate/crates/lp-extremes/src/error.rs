//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p must lie in [1, inf], got {0}")]
    InvalidNormOrder(f64),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("zero vector has no dual witness")]
    ZeroVector,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("circulant embedding is not nonnegative definite: {0}")]
    EmbeddingFailed(String),

    #[error(
        "truncation window too small: exponent at the boundary must reach {required}, \
         need S >= {min_s:.4}"
    )]
    TruncationWindow { required: f64, min_s: f64 },

    #[error("infeasible Monte Carlo target: {reason}; largest feasible u is about {max_feasible_u:.4}")]
    InfeasibleTarget { reason: String, max_feasible_u: f64 },

    #[error("divergent integral: drift functional has no positive coefficient")]
    DivergentIntegral,

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
