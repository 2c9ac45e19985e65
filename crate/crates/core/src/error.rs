use thiserror::Error;

/// Errors raised while building or running a propagation.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model parameters or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with arguments that do not fit together,
    /// e.g. a state indexed in the wrong ordering.
    #[error("usage error: {0}")]
    Usage(String),

    /// Two structures that must describe the same basis disagree.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("tridiagonal eigensolver did not converge in block {block} after {iterations} iterations")]
    NoConvergence { block: usize, iterations: usize },

    /// A Thomas sweep met a pivot too small to divide by.
    #[error("singular tridiagonal system at row {row} (|pivot| = {pivot:.3e}); reduce dt")]
    Singular { row: usize, pivot: f64 },

    /// The dense oracle refuses dimensions above its guard.
    #[error("dimension {dim} exceeds the dense oracle limit of {limit}")]
    OracleGuard { dim: usize, limit: usize },

    #[error("{what} did not converge (last change {change:.3e})")]
    NotConverged { what: String, change: f64 },

    #[error("Gaussian comparator diverged at t = {time} ns (covariance norm {norm:.3e})")]
    Divergence { time: f64, norm: f64 },

    /// A propagation step failed; the state is left at the end of the
    /// previous step.
    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::Singular { .. }
            | Error::Divergence { .. }
            | Error::NotConverged { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
