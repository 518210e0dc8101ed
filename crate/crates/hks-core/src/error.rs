//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, spectral operations, schedules,
/// integration and the theory oracles.
#[derive(Debug, Error)]
pub enum HksError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite values")]
    DivergedInput,

    #[error("spectrum violates Hermitian symmetry (max deviation {max_deviation:e})")]
    Asymmetry { max_deviation: f64 },

    #[error("invalid Lebesgue exponent p = {0}; p must be >= 1")]
    InvalidExponent(f64),

    #[error("invalid Besov index: {0}")]
    InvalidIndex(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solution diverged at t = {t}{}", context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Divergence { t: f64, context: Option<String> },

    #[error("time step {dt:e} fell below dt_min {dt_min:e} at t = {t}")]
    StepUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("record is missing the series '{0}'")]
    MissingSeries(String),

    #[error("iterative bound violated: slack = {0:e}")]
    BoundViolation(f64),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HksError>;
