//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by transform, framing, channel, receiver, and harness code.
#[derive(Debug, Error)]
pub enum McdmError {
    /// A subcarrier or sample index was outside its valid range.
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    /// A vector had the wrong length for the requested operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Bit counts did not line up with symbol or subcarrier counts.
    #[error("framing error: {0}")]
    Framing(String),

    /// More users than available data subcarriers, or similar overflow.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical precondition (e.g. oversampling factor) not met.
    #[error("precision error: {0}")]
    Precision(String),

    /// A pilot symbol was zero, making the estimator singular.
    #[error("singular pilot symbol at index {0}")]
    SingularPilot(usize),

    /// Synchronization search window invalid for the received signal.
    #[error("sync search error: {0}")]
    SyncSearch(String),

    /// Symbol segment fell outside the received signal.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// A probe candidate had no measured bits.
    #[error("incomplete probe: {0}")]
    IncompleteProbe(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, McdmError>;
