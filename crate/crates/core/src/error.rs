//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Library-wide error type.
///
/// The variants separate structural misuse (shape/domain), unmet theorem
/// hypotheses (which are not violations), numeric breakdowns, resource
/// guards, and configuration problems.
#[derive(Debug, Error)]
pub enum Error {
    /// An element does not match the block structure of its algebra.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition of a checked inequality failed; distinct from the
    /// inequality itself being violated.
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    /// Non-finite values or a certified postcondition failing numerically.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A guard against runaway computation (e.g. sphere enumeration).
    #[error("resource guard: {0}")]
    Resource(String),

    /// Invalid scenario or harness configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
