//! Crate-wide error type.

/// Errors produced by the solver library.
///
/// Every fallible operation reports enough context to identify the offending
/// block or parameter without a debugger.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A factorization hit a pivot below the singularity threshold.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// Operands with incompatible shapes; the message names the blocks.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An iterative kernel ran out of its iteration budget.
    #[error("no convergence after {iterations} iterations in {context}")]
    NoConvergence { context: &'static str, iterations: usize },

    /// A dense materialization or factorization beyond the supported size.
    #[error("size limit exceeded: {0}")]
    SizeLimitExceeded(String),

    /// Block diagonal dominance required by a bound does not hold.
    #[error("block diagonal dominance violated: {0}")]
    DominanceViolated(String),

    /// A structural precondition of a theorem-backed bound failed.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative solver stopped at its iteration cap without converging.
    #[error("maximum iterations exceeded: {0}")]
    MaxIterExceeded(String),

    /// A JSON document does not match the expected schema.
    #[error("malformed document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
