use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("timestamps out of order at event {index}: {t} after {previous}")]
    Order { index: usize, previous: u64, t: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("label error: {0}")]
    Label(String),

    #[error("histogram error: {0}")]
    Histogram(String),

    #[error("cost table error: {0}")]
    CostTable(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by the input data rather than by how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Geometry(_)
                | Error::Order { .. }
                | Error::Length { .. }
                | Error::Label(_)
                | Error::Histogram(_)
                | Error::CostTable(_)
                | Error::Io { .. }
        )
    }
}
