use thiserror::Error;

use crate::graph::Subset;

/// Errors produced by the graph, algebra, and Monte Carlo engines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The caller-supplied transfer-matrix basis does not contain a subset
    /// produced by the superoperator.
    #[error("basis not closed: {escaped} (produced from {origin}) is not in the basis")]
    BasisNotClosed { origin: Subset, escaped: Subset },

    #[error(
        "state of {amplitudes} amplitudes ({required_gib:.3} GiB) exceeds the memory cap of \
         {cap_gib} GiB; raise the cap to allocate it"
    )]
    MemoryCap {
        amplitudes: u128,
        required_gib: f64,
        cap_gib: f64,
    },

    /// Numerical failure inside an eigensolver or other floating-point routine.
    #[error("computation failed: {0}")]
    Computation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
