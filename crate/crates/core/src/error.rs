use thiserror::Error;

/// Errors raised by the numerical primitives, models, and filters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A factorization pivot was non-positive, or a covariance developed a
    /// negative eigenvalue beyond tolerance.
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("non-finite state in ensemble member {member} at t = {t}")]
    NonFiniteMember { member: usize, t: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("degenerate sigma-point scaling: n + lambda = {0:e}")]
    DegenerateScaling(f64),

    #[error("time {t} is before the first breakpoint {start}")]
    OutOfRange { t: f64, start: f64 },

    #[error("invalid signal profile: {0}")]
    InvalidProfile(String),

    #[error("all particle weights vanished")]
    AllWeightsZero,

    #[error("weights sum to {0}, expected 1")]
    WeightSumMismatch(f64),

    #[error("tank {tank} is empty (mass {mass:e} g); outflow derivative is singular")]
    SingularAtEmptyTank { tank: usize, mass: f64 },

    /// Offending (state index, step index) pairs.
    #[error("truth is zero at {count} (state, step) entries: {entries:?}", count = .0.len(), entries = .0)]
    DivisionByZeroTruth(Vec<(usize, usize)>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
