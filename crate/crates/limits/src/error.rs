//! Error type for limit-system construction and integration.

use sgdlab_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("invalid limit-system configuration: {0}")]
    InvalidConfig(String),

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eig})")]
    NotPsd { min_eig: f64 },

    #[error(transparent)]
    Core(#[from] CoreError),
}
