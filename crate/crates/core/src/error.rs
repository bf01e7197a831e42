use thiserror::Error;

/// Errors produced by the solver, simulator and configuration layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value violates a domain invariant (probability out of range, u <= 0, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A horizon, lattice or enumeration exceeded its configured bound.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A stage state was queried that the table does not contain.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// Components were combined inconsistently (policy vs. problem, policy vs. model).
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
