use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{message}: best estimate {estimate:e} with error bound {error_bound:e}")]
    Convergence {
        message: String,
        estimate: f64,
        error_bound: f64,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::InvalidPartition(_)
            | Error::Parse { .. }
            | Error::Schema(_)
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::Convergence { .. } | Error::Invariant(_) | Error::Numerical(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
