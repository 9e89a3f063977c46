use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate truncation interval ({lo}, {hi}) after standardization: no representable mass")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("estimator degenerate: {0}")]
    EstimatorDegenerate(String),

    #[error("bridge iteration did not converge after {} iterations (last iterate {:?})", .history.len(), .history.last())]
    Convergence { history: Vec<f64> },

    #[error("log target returned NaN at {point:?}")]
    NonFiniteTarget { point: Vec<f64> },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate summary: {0}")]
    DegenerateSummary(String),

    #[error("rank-deficient design: columns {columns:?} are linearly dependent on earlier columns")]
    Collinearity { columns: Vec<usize> },

    #[error("no simulation fell within the tolerance")]
    DegenerateTolerance,

    #[error("simulation failed at theta = {theta:?}: {message}")]
    Simulation { theta: Vec<f64>, message: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
