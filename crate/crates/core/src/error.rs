use thiserror::Error;

/// Errors surfaced by every module of the crate.
///
/// The variants line up with the CLI exit codes: argument problems exit with
/// 2, objective and protocol failures with 3, numeric failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("objective error: {0}")]
    Objective(String),

    #[error("degenerate objective: {0}")]
    Degenerate(String),

    #[error("insufficient counts (S1 = {s1}, S2 = {s2})")]
    InsufficientCounts { s1: u64, s2: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn objective(msg: impl Into<String>) -> Self {
        Error::Objective(msg.into())
    }

    /// Process exit code used by the `qncal` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Unsupported(_) => 2,
            Error::Numeric(_) => 4,
            Error::Objective(_)
            | Error::Degenerate(_)
            | Error::InsufficientCounts { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 3,
        }
    }
}
