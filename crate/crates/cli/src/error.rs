use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: expected columns {expected:?}, found {found:?}")]
    Schema { path: PathBuf, expected: Vec<String>, found: Vec<String> },

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] bayesbench_core::error::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for configuration and input-schema problems, 3 for everything that
    /// fails once work has started.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema { .. } => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
