//! Error type shared by the vector/trajectory primitives.

use thiserror::Error;

/// Errors raised by summary-vector and trajectory operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Two objects that must share a coordinate schema do not.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    /// A value or vector has the wrong length for its schema.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    /// A non-finite value appeared where only finite values are allowed.
    #[error("non-finite value in {0}")]
    NonFinite(String),
    /// A query time lies outside the trajectory's recorded range.
    #[error("time {t} outside trajectory range [0, {t_max}]")]
    TimeOutOfRange { t: f64, t_max: f64 },
    /// A time grid is malformed (empty, not starting at 0, or not strictly increasing).
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    /// A comparison window is empty or not covered by both trajectories.
    #[error("invalid window [{t0}, {t1}]: {reason}")]
    InvalidWindow { t0: f64, t1: f64, reason: String },
    /// CSV contents could not be parsed.
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    /// An I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
