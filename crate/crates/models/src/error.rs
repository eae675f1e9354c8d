//! Error type for model construction, gradients, and SGD runs.

use sgdlab_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("wrong datum kind for this model: expected {0}")]
    WrongDatum(&'static str),

    #[error("SGD iterate became non-finite at step {step}")]
    Diverged { step: usize },

    #[error("per-sample loss unavailable: {0}")]
    LossUnavailable(&'static str),

    #[error("explicit noise tensor too large (n={n}, k={k}); use the factored sampler")]
    TensorTooLarge { n: usize, k: u32 },

    #[error(transparent)]
    Core(#[from] CoreError),
}
