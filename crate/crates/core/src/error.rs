use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {what} = {index} (limit {limit})")]
    Index {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate prior: maximum epistemic uncertainty is zero while the scaling factor is positive")]
    DegeneratePrior,

    #[error("planner did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("invalid environment state: {0}")]
    State(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_index(what: &'static str, index: usize, limit: usize) -> Result<()> {
    if index < limit {
        Ok(())
    } else {
        Err(Error::Index { what, index, limit })
    }
}
