//! Error type shared by the whole crate.

/// Failure modes of problem setup, mesh construction, and solves.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad mesh size, malformed sweep set,
    /// inconsistent boundary split, and similar user-fixable issues.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the domain of an operation (parameter ranges,
    /// evaluation points outside [0,1], coefficient bound violations).
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical failure: lost pivot, non-finite intermediate value.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
