use thiserror::Error;

/// Errors produced by the simulator, environment and tooling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter set violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An input lies outside the domain of a kinematic relation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-supplied argument is unusable (empty batch, bad grid, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The API was driven in an order it does not support.
    #[error("usage error: {0}")]
    Usage(String),
    /// Reading or parsing a persisted artifact failed.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
