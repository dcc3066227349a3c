use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("covariance matrix is not symmetric: |K[{row},{col}] - K[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    /// Cholesky failed. The full-rank assumption is violated and the lasso
    /// solution may not be unique.
    #[error("covariance matrix is not positive definite (lasso solution possibly non-unique)")]
    NotPositiveDefinite,

    #[error("predictor column {0} has zero variance")]
    DegenerateColumn(usize),

    #[error("dataset has {rows} rows, at least {needed} required")]
    TooFewObservations { rows: usize, needed: usize },

    #[error("dataset has no response column")]
    MissingResponse,

    #[error("zero set covers every coordinate")]
    EmptyRemainder,

    #[error("index {index} out of range for dimension {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("covariance matrix does not have unit diagonal")]
    NotNormalized,

    #[error("response variance is required")]
    MissingResponseVariance,

    #[error("active submatrix is singular")]
    SingularSubmatrix,

    #[error("sign state revisited at s = {s}")]
    StateRevisited { s: f64 },

    #[error("no event candidate while active set is nonempty (s = {s})")]
    UnboundedTail { s: f64 },

    #[error("query {0} outside the path domain")]
    OutOfRange(String),

    #[error("t must be positive, got {0}")]
    NonpositiveT(f64),

    #[error("no closed-form diagnostics for p = {0}")]
    UnsupportedDimension(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "iteration limit reached after {iterations} iterations (kkt residual {kkt_residual:e})"
    )]
    MaxIterExceeded {
        iterations: usize,
        best: Vec<f64>,
        kkt_residual: f64,
    },

    #[error("no sign state satisfies the KKT conditions at lambda = {lambda}")]
    NoStateAccepted { lambda: f64 },

    #[error("{count} distinct sign states satisfy the KKT conditions at lambda = {lambda}")]
    MultipleStatesAccepted { lambda: f64, count: usize },
}
