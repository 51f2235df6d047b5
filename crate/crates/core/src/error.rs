use thiserror::Error;

/// Errors produced by the numerical kernel and the optimization routines built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { routine: &'static str, iterations: usize, residual: f64 },

    /// Iteration cap reached; `trace` holds the objective history up to that point.
    #[error("{routine} hit its iteration limit of {iterations}")]
    IterationLimit { routine: &'static str, iterations: usize, trace: Vec<f64> },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Near-optimal allocation only covers the open interval 0 < epsilon < 1.
    #[error("weight {epsilon} is on the boundary; use the exact allocation rule (all elements to one link)")]
    BoundaryWeight { epsilon: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
