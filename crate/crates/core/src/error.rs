use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation does not apply to this speed-field family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A field spec string, config file or CSV could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The dynamic program would need more memory than the configured budget.
    #[error("memory budget exceeded: {needed} bytes needed, budget is {budget} bytes (use the checkpointed solver)")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Broken internal invariant. Seeing this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Domain(_) | Error::Unsupported(_) | Error::MemoryBudget { .. } => 3,
            Error::Io { .. } => 4,
            Error::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
