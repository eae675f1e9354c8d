//! Error type for experiment configuration, execution, and export.

use sgdlab_core::CoreError;
use sgdlab_fixedpoints::FixedPointError;
use sgdlab_limits::LimitError;
use sgdlab_models::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("TOML parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Limit(#[from] LimitError),

    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl HarnessError {
    /// Attaches a path to a raw I/O error.
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
