//! Crate-wide error type.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Errors produced by signal I/O, the codec, and the statistics engine.
#[derive(Debug)]
pub enum Error {
    /// A file could not be read or written.
    Io { path: PathBuf, source: io::Error },
    /// A text input (signal file, records CSV, config file) failed to parse.
    Parse {
        path: PathBuf,
        /// 1-based line number of the offending line.
        line: usize,
        detail: String,
    },
    /// An argument or precondition check failed.
    Invalid(String),
    /// An encoded block is structurally inconsistent.
    Corrupt(String),
    /// A statistical computation has no defined answer for the given input.
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::Parse { path, line, detail } => {
                write!(f, "{}:{}: {}", path.display(), line, detail)
            }
            Error::Invalid(msg) => write!(f, "invalid input: {}", msg),
            Error::Corrupt(msg) => write!(f, "corrupt block: {}", msg),
            Error::Degenerate(msg) => write!(f, "degenerate input: {}", msg),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
