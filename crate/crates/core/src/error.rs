use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the toolkit.
///
/// [`Error::kind`] groups them into the coarse classes the command line
/// maps onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{0}")]
    BareIo(#[from] io::Error),

    #[error("{location}: {message}")]
    Format { location: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vocabulary is empty: no symbol reaches min_count {min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("pair stream is empty")]
    EmptyPairStream,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no in-vocabulary token in phrase {0:?}")]
    NoEmbedding(String),

    #[error("cosine similarity undefined for a zero-norm vector")]
    UndefinedSimilarity,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("symbol {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
}

/// Coarse error classes.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Usage,
            Error::Io { source, .. } | Error::BareIo(source)
                if source.kind() == io::ErrorKind::NotFound =>
            {
                ErrorKind::Usage
            }
            Error::Io { .. } | Error::BareIo(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }
}
