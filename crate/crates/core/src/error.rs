use thiserror::Error;

/// Errors raised across the regression toolkit.
///
/// Variants split into two families: input/validation problems
/// ([`Error::is_numerical`] is false) and numerical failures of an otherwise
/// valid request (ill-conditioned Gram matrices, non-convergence).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point:?} lies outside the unit cube")]
    OutsideDomain { point: Vec<f64> },

    #[error("density is singular at boundary point {point:?} for alpha = {alpha}")]
    SingularEvaluation { alpha: f64, point: Vec<f64> },

    #[error("basis too large: (N+1)^d = {requested} exceeds the limit of {limit}")]
    BasisTooLarge { requested: u128, limit: usize },

    #[error(
        "underdetermined system: n = {n} samples but required n >= (N+1)^d = {required}"
    )]
    Underdetermined { n: usize, required: usize },

    #[error("Gram matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error(
        "ill-conditioned Gram matrix ({reason}); a stable fit needs roughly n >= {suggested_n} samples \
         (stability threshold at delta = {delta})"
    )]
    IllConditioned {
        reason: String,
        suggested_n: u64,
        delta: f64,
    },

    #[error("no scatter node within radius {radius} of the query point")]
    NoNodeInRange { radius: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("evaluation budget exceeded: {requested} evaluations requested, limit {limit}")]
    BudgetExceeded { requested: u128, limit: u128 },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the request itself.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Underdetermined { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::IllConditioned { .. }
                | Error::NoConvergence { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
