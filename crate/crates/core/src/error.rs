use std::path::PathBuf;

/// Errors produced by every stage of the pipeline.
///
/// Each variant maps onto a stable machine-readable code (see [`Error::code`])
/// that the command-line front end prints on failure.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("prediction join failed: {0}")]
    Join(String),

    #[error("corpus hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "E_PARSE",
            Error::Validation(_) => "E_VALIDATION",
            Error::NotFound(_) => "E_NOT_FOUND",
            Error::Param(_) => "E_PARAM",
            Error::Join(_) => "E_JOIN",
            Error::HashMismatch { .. } => "E_HASH",
            Error::Io { .. } => "E_IO",
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Fails with [`Error::HashMismatch`] unless both hashes are equal.
pub fn ensure_same_corpus(expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::HashMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}
