use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure of a CLI command, mapped onto a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid config, malformed input files.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<gfk_core::Error> for CliError {
    fn from(e: gfk_core::Error) -> Self {
        use gfk_core::Error::*;
        match e {
            Domain(_) | Dimension(_) | InsufficientData(_) => CliError::Usage(e.to_string()),
            DegenerateSubspace { .. } | DegenerateTraining(_) | Numeric(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
