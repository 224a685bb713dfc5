use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different variable universes")]
    UniverseMismatch,
    #[error("scalar backends or contexts differ")]
    BackendMismatch,
    #[error("denominator vanishes identically after substitution")]
    PoleAtSubstitution,
    #[error("tower depth exhausted: need level {needed}, depth is {depth}")]
    DepthExhausted { needed: usize, depth: usize },
    #[error("unhandled special point: {0}")]
    UnhandledSpecialPoint(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("identity check failed: {0}")]
    IdentityFailure(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IdentityFailure(_) => 3,
            Error::Budget(_) | Error::DepthExhausted { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
