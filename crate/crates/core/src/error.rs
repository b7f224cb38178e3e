use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("forms live over different coframes")]
    CoframeMismatch,

    #[error("expected a form of bidegree ({0},{1})")]
    BidegreeMismatch(usize, usize),

    #[error("row {row} of b sums to {sum:.6}, expected -1")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("parameters are not pluriclosed-admissible: {0}")]
    NotAdmissible(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("metric matrix is singular")]
    SingularMetric,

    #[error("metric is not in split normal form: {0}")]
    NotNormalForm(String),

    #[error("flow time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("flow invariant breached at t = {t}: {what} (step-size failure)")]
    InvariantBreach { t: f64, what: String },

    #[error("closed-form path unavailable: {0}")]
    HypothesesUnmet(String),

    #[error("algebra failed validation: {0}")]
    InvalidAlgebra(String),
}
