use std::path::PathBuf;

use thiserror::Error;

/// Failures of the experiment driver, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid document: {0}")]
    Format(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Core(#[from] melab_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for I/O and parse errors, 3 for refused preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Io { .. } | LabError::Parse { .. } | LabError::Format(_) => 1,
            LabError::Precondition(_) | LabError::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
