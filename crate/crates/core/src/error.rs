use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// The lattice does not provide a capability the operation needs.
    #[error("lattice does not support {0}")]
    Unsupported(&'static str),

    #[error("resource cap exceeded: {what} (limit {limit})")]
    ResourceCap { what: String, limit: u64 },

    #[error("syntax error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsafe variable {variable} in rule `{rule}`")]
    UnsafeVariable { variable: String, rule: String },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    /// A proven invariant failed to hold. Always a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn cap(what: impl Into<String>, limit: u64) -> Self {
        Error::ResourceCap {
            what: what.into(),
            limit,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceCap { .. } => 2,
            Error::Internal(_) => 3,
            _ => 1,
        }
    }
}
