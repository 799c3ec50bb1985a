use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive verification was requested over a space larger than the configured budget.
    #[error("exhaustive verification refused: {0}")]
    BudgetExceeded(String),

    /// The Las Vegas loop ran out of attempts.
    #[error("no verified family after {attempts} attempts (last counterexample: {last})")]
    GenerationFailed { attempts: u32, last: String },

    /// A node id does not exist in the network or family.
    #[error("unknown node {0}")]
    UnknownNode(usize),

    /// A node cannot be reached from the source (or from the woken set).
    #[error("node {0} is unreachable")]
    Unreachable(usize),

    /// A verifier produced a counterexample that does not replay as a violation.
    #[error("unsound counterexample: {0}")]
    UnsoundCounterexample(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
