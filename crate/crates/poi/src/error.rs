use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoiError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: line {line}: {message}")]
    Parse { source_name: String, line: u64, message: String },
    #[error("{source_name}: {message}")]
    Format { source_name: String, message: String },
    #[error(transparent)]
    Core(#[from] poi_core::Error),
    #[error("{0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, PoiError>;

impl PoiError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PoiError::Io { path: path.into(), source }
    }

    pub(crate) fn format(source_name: &str, message: impl Into<String>) -> Self {
        PoiError::Format { source_name: source_name.into(), message: message.into() }
    }

    pub(crate) fn parse(source_name: &str, line: u64, message: impl Into<String>) -> Self {
        PoiError::Parse { source_name: source_name.into(), line, message: message.into() }
    }
}
