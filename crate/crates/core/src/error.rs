use thiserror::Error;

/// Errors produced by state construction, analytic formulas, and the
/// simulator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("state is not normalized: |alpha|^2 + |beta|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable queue: load {load} >= 1 needs a finite buffer")]
    Unstable { load: f64 },

    #[error("value {value} outside attainable range ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("trace contains no served match")]
    NoServedMatches,

    #[error("wait vectors are not comparable: {0}")]
    Incomparable(String),

    #[error("instance is not realizable by a work-conserving policy: {0}")]
    NotRealizable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
