//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by graph construction, solvers, and the survival pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (dimension mismatch,
    /// out-of-range parameter, non-finite value, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A similarity kernel could not be evaluated (constant feature vector
    /// for the correlation kernel, all points identical for the diffusion
    /// map, ...).
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// Data is too degenerate to transform (e.g. every observation censored).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The local least-squares system at a node is singular.
    #[error("singular system at node {node}: {reason}")]
    Singular { node: usize, reason: String },

    /// An iterate became non-finite.
    #[error("solver diverged at iteration {iteration}")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
