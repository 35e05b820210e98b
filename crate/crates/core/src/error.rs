use std::io;
use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum LartError {
    /// A caller-supplied value is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A text file did not follow the expected format.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Two partitions (or a partition and a multiplex) disagree on shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LartError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LartError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        LartError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = LartError> = std::result::Result<T, E>;
