//! Error type for the fixed-point catalogue.

use thiserror::Error;

use sgdlab_limits::LimitError;

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Failure while building one of the limiting vector fields used for
    /// residual evaluation or schema lookup.
    #[error(transparent)]
    Limit(#[from] LimitError),
}
