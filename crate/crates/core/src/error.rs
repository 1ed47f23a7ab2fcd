//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty foreground: no voxel above the magnitude floor")]
    EmptyForeground,

    #[error("empty mask")]
    EmptyMask,

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("rank-deficient basis: {0}")]
    RankDeficient(String),

    #[error("non-finite value encountered at step {step}: {context}")]
    NonFinite { step: usize, context: String },

    #[error("config schema violation: {0}")]
    Schema(String),

    #[error("container format error: {0}")]
    Container(String),

    #[error("payload checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("output directory is locked by another process: {0}")]
    Locked(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Coarse category used by the CLI to pick an exit code.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Schema(_) | Error::InvalidInput(_) => ErrorCategory::Schema,
            Error::NonFinite { .. } | Error::RankDeficient(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Schema,
    Data,
    Numeric,
}
