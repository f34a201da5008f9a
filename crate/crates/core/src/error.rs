use thiserror::Error;

/// Errors raised by the optimization library and its harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("non-finite gradient at round {round}")]
    NonFiniteGradient { round: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible point at round {round}: {detail}")]
    Infeasible { round: usize, detail: String },

    #[error("stream ended after {got} rounds, expected {expected}")]
    StreamTooShort { expected: usize, got: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("malformed round tape: {0}")]
    Tape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
