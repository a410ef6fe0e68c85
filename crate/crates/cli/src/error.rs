use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dod_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("stale poset hash: {0}")]
    StaleHash(String),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {}", .0.join(", "))]
    CheckFailed(Vec<String>),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
