//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type for layout validation, scheduling, encoding,
/// decoding, simulation, and metric computation.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A `SegmentLayout` violates one of its structural invariants.
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    /// An operation that needs at least one frame received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A frame count does not line up with the required granularity
    /// (chunk size or subsampling factor).
    #[error("misaligned length: {0}")]
    Misaligned(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation was called in a state that no longer admits it
    /// (e.g. advancing a stream after the finish signal).
    #[error("lifecycle: {0}")]
    Lifecycle(String),

    /// A caller-facing precondition was violated.
    #[error("precondition: {0}")]
    Precondition(String),

    /// A serialized weight file could not be understood.
    #[error("weight format: {0}")]
    WeightFormat(String),

    /// Metric inputs violate the metric's invariants.
    #[error("invalid metric input: {0}")]
    InvalidMetricInput(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Trace (de)serialization failure.
    #[error("trace format: {0}")]
    TraceFormat(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type CoreResult<T> = Result<T, CoreError>;
