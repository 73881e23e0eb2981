use thiserror::Error;

/// Rejected grid construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("n must be even, got {0}")]
    OddSize(usize),
    #[error("n must be >= 8, got {0}")]
    TooSmall(usize),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(String),
}

/// Failures during time integration.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// Coefficients left the finite range. Carries the last valid state so
    /// a caller can report the partial trajectory.
    #[error("diverged at t = {t} (step {step}): non-finite coefficients")]
    Diverged {
        t: f64,
        step: usize,
        last_valid: Box<crate::solver::SolverState>,
    },
    #[error("invalid solver parameter: {0}")]
    BadParams(String),
}

/// Failures in the lift map and lifted integration.
#[derive(Debug, Clone, Error)]
pub enum LiftError {
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("rate {rate} outside clamp bounds [{min}, {max}]")]
    RateOutOfBounds { rate: f64, min: f64, max: f64 },
    #[error("query {query} outside sampled range [{lo}, {hi}]")]
    OutOfRange { query: f64, lo: f64, hi: f64 },
    #[error("invalid rate parameters: {0}")]
    BadParams(String),
    #[error("lifted step overruns map coverage: tau {tau} + dtau {dtau} > {hi}")]
    MapExhausted { tau: f64, dtau: f64, hi: f64 },
    #[error("series cover different horizons: {0}")]
    HorizonMismatch(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
