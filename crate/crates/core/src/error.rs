use std::path::PathBuf;

/// Errors raised by index construction, refinement, and file ingestion.
#[derive(Debug, thiserror::Error)]
pub enum JoinError {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data is well-formed but violates a structural rule
    /// (ring minimums, duplicate identifiers, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A running sum or cell count no longer fits the index integer type.
    #[error("size error: {0}")]
    Size(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl JoinError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    /// Process exit code for the command-line driver: 1 for usage and parse
    /// problems, 2 for validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = JoinError> = std::result::Result<T, E>;
