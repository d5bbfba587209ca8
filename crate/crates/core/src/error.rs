use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ambiguous zero match: {a} and {b} are {distance:e} apart (tolerance {tolerance:e})")]
    AmbiguousMatch {
        a: String,
        b: String,
        distance: f64,
        tolerance: f64,
    },

    #[error("near-dependent basis: smallest Grammian eigenvalue {min_eigenvalue:e}")]
    NearDependentBasis { min_eigenvalue: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("interpolation data is infeasible by structure: {0}")]
    InfeasibleByStructure(String),

    #[error("separation too small: attained {attained:e}, required {required:e}")]
    Separation { attained: f64, required: f64 },

    #[error("rank decision is ill-conditioned: {0}")]
    RankTolerance(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
