use thiserror::Error;

/// Errors surfaced by every module of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A bound was evaluated outside the rate regime in which it is stated.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two output (symbol) vertices may never be merged.
    #[error("contraction of two symbol vertices {0} and {1} is forbidden")]
    ContractForbidden(usize, usize),

    /// Two messages occupied the same mesh node during the same hop-step.
    #[error("message conflict at cycle {cycle} on node {node} between messages {first} and {second}")]
    Conflict {
        cycle: u64,
        node: usize,
        first: usize,
        second: usize,
    },

    #[error("solver limit exceeded: {0}")]
    SolverLimit(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("empty sweep: {0}")]
    EmptySweep(String),

    /// A property checked by a command did not hold.
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
}

impl Error {
    /// Short machine-readable kind tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfRegime(_) => "out-of-regime",
            Error::Unsupported(_) => "unsupported",
            Error::ContractForbidden(..) => "contract-forbidden",
            Error::Conflict { .. } => "conflict",
            Error::SolverLimit(_) => "solver-limit",
            Error::Io(_) => "io",
            Error::EmptySweep(_) => "empty-sweep",
            Error::AssertionFailed(_) => "assertion-failed",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
