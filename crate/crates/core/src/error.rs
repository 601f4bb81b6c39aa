use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data is valid but the requested quantity is undefined on it
    /// (zero variance, all-equal samples, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("null table format error: {0}")]
    Format(String),

    #[error("null table mismatch: {0}")]
    TableMismatch(String),

    /// Carries the raw `(n, sd, se)` grid so callers can inspect or refit it.
    #[error("fit did not converge: {reason}")]
    NonConvergence {
        reason: String,
        grid: Vec<(usize, f64, f64)>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::TableMismatch(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Format(_) | Error::Io(_) => 2,
            Error::Degenerate(_) => 3,
            Error::TableMismatch(_) => 4,
            Error::NonConvergence { .. } => 5,
        }
    }
}
