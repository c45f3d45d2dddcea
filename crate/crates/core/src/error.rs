use thiserror::Error;

/// Errors produced by the library and surfaced by the CLI.
#[derive(Debug, Error)]
pub enum MuntzError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("non-finite value {value} at x = {x}")]
    Evaluation { x: f64, value: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MuntzError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MuntzError::InvalidArgument(msg.into())
    }
}

impl From<serde_json::Error> for MuntzError {
    fn from(e: serde_json::Error) -> Self {
        MuntzError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, MuntzError>;
