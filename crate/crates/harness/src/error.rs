use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] shotfrugal_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{path}: missing column {column:?} required by plot kind {kind}")]
    MissingColumn {
        path: PathBuf,
        column: String,
        kind: &'static str,
    },

    #[error("{0}")]
    Plot(String),

    #[error("bound check failed: {0}")]
    BoundCheck(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for a failed bound check, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::BoundCheck(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
