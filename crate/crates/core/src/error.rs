use thiserror::Error;

/// Errors produced anywhere in the reduction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A new basis function is numerically inside the span of the current
    /// ones (or a Gram matrix is not positive definite).
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// A dual basis failed an internal sanity check that cannot fail for a
    /// well-formed value.
    #[error("internal consistency: {0}")]
    Consistency(String),

    /// The active-set loop failed on one coordinate.
    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// The active-set loop hit its iteration cap. `best` holds the last
    /// feasible iterate (all m+1 coordinates).
    #[error("iteration cap of {cap} reached without satisfying optimality")]
    IterationCap { cap: usize, best: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
