//! Error types shared across the pipeline.

use thiserror::Error;

/// Errors produced by pipeline operations.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// A configuration field is out of its valid range.
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// A vector or synopsis does not match the configured dimensionality.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A count argument lies outside the support of a distribution.
    #[error("count {value} out of range 0..={max}")]
    CountOutOfRange { value: usize, max: usize },

    /// An operation needs more items than were supplied.
    #[error("{context}: requires at least {min}, got {got}")]
    TooFew {
        context: &'static str,
        min: usize,
        got: usize,
    },

    /// A synopsis was requested for an epoch that does not advance the sequence.
    #[error("epoch {requested} does not advance past {last} for node {node}")]
    EpochNotMonotone {
        node: usize,
        last: u64,
        requested: u64,
    },

    /// A density or probability was requested over an empty quanta window.
    #[error("quanta window is empty; no density estimate available")]
    EmptyWindow,

    /// A trace file could not be parsed into vectors.
    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        PipelineError::Config {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
