//! Crate-wide error type.
//!
//! Variants are grouped by failure class so that callers (notably the CLI)
//! can map them onto a stable exit-code taxonomy: validation problems,
//! numerical failures, and resource caps.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch: non-square input to a spectral routine, incompatible
    /// product dimensions, and the like.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid input values: non-stochastic matrices, probabilities outside
    /// [0,1], symbols outside the alphabet.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed to converge or hit a degenerate
    /// configuration (zero derivative, complex-root capture).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The chain has a (near-)degenerate unit eigenvalue, so a unique
    /// stationary distribution does not exist.
    #[error("mixing error: {0}")]
    Mixing(String),

    /// A configured resource cap (alphabet^length style enumeration bounds)
    /// would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// Root tracking for the moment-generating function failed.
    #[error("tracking error: {0}")]
    Tracking(String),

    /// Input lies outside the domain of validity of a closed form
    /// (e.g. outside the convergence disk of a series).
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not converge within its term cap.
    #[error("convergence error: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
