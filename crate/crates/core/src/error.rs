use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or arguments.
    Config,
    /// Input data missing, malformed or inconsistent.
    Data,
    /// A numerical routine could not produce a finite answer.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series `{id}` has zero variance (constant value {value})")]
    ZeroVariance { id: String, value: f64 },

    #[error("series `{id}` has missing values; impute before {operation}")]
    MissingValues { id: String, operation: &'static str },

    #[error("series `{id}` needs at least {needed} observations, got {got}")]
    TooShort {
        id: String,
        needed: usize,
        got: usize,
    },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("warping band {band} admits no path between lengths {m} and {n}")]
    BandTooNarrow { band: usize, m: usize, n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("candidate `{id}` covers years {got:?}, target covers {expected:?}")]
    YearMismatch {
        id: String,
        expected: Vec<i32>,
        got: Vec<i32>,
    },

    #[error("unknown similarity method `{0}`")]
    UnknownMethod(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("offline mode forbids fetching `{instrument}` (no cached response)")]
    OfflineViolation { instrument: String },

    #[error("request to {url} failed: {message}")]
    Http {
        url: String,
        status: Option<u16>,
        message: String,
    },

    #[error("malformed payload field `{field}`: {message}")]
    Payload { field: String, message: String },

    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::UnknownMethod(_) => ErrorKind::Config,
            Error::NonFinite { .. } | Error::Diverged(_) | Error::ZeroVariance { .. } => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
