use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed (bad dimension, negative gain/variance,
    /// gate not present in the architecture, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The requested quantity has no supported closed form or solver in this
    /// parameter regime (e.g. the interior resolvent with both gate gains
    /// nonzero).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// An iterative solver ran out of iterations or failed to bracket a root.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A numeric invariant was violated at runtime (divergent trajectory,
    /// overflow, non-positive-definite covariance, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A closed-form expansion was evaluated at a degenerate point; the
    /// message names the branch that applies instead.
    #[error("degenerate case: {0}")]
    Degenerate(String),

    /// The dense eigensolver failed to converge.
    #[error("eigensolver failure: {0}")]
    Eig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
