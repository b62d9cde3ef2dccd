use std::path::PathBuf;

use crate::model::FunctionSymbol;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("{symbol} expects {expected} argument(s), got {got}")]
    Arity {
        symbol: FunctionSymbol,
        expected: usize,
        got: usize,
    },

    #[error("{symbol} is not in the configured function set")]
    SymbolNotInSet { symbol: FunctionSymbol },

    #[error("terminal index {index} out of range for {count} terminal(s)")]
    TerminalOutOfRange { index: usize, count: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stale fitness read for individual {index}")]
    StaleFitness { index: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
