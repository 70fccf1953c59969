use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature ran out of subdivisions. Carries the best
    /// estimate reached and its error bound (both on the scale of the
    /// quantity being computed, e.g. a log marginal likelihood).
    #[error("quadrature failed to converge (estimate {estimate}, error bound {error_bound})")]
    Convergence { estimate: f64, error_bound: f64 },

    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("simulation failed: {failed} of {total} cells could not be computed")]
    SimulationFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
