use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] anatomy_core::Error),

    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    /// 1 for physics or validation failures, 2 for usage and I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Model(anatomy_core::Error::InvalidConfig(_) | anatomy_core::Error::Parse { .. }) => 2,
            CliError::Model(_) | CliError::ValidationFailed(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
