use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Validation(#[from] qnd_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    /// 1 usage/validation, 2 I/O. Property failures (3) are not errors; they
    /// are reported through [`crate::RunOutcome`].
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Validation(_) => 1,
            CliError::Io { .. } | CliError::Serialize(_) => 2,
        }
    }
}
