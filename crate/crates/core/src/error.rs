//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by geometry, oracle, solver, and analysis code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A point left the domain of a mirror map or objective (e.g. a
    /// non-positive coordinate handed to the entropy map).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent construction input (unsupported pairing, bad constant, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step size must be positive and finite, got {alpha}")]
    NonPositiveStep { alpha: f64 },

    #[error("iteration index must be at least 1")]
    ZeroIteration,

    /// The gradient was requested at a kink of a non-smooth objective.
    #[error("objective is not differentiable at the queried point (coordinate {coordinate})")]
    NotDifferentiable { coordinate: usize },

    /// A finite-time bound was queried before its admissible start index.
    #[error("iteration {t} is below the admissible start t0 = {t0} (step sum still too small)")]
    BelowStartIteration { t: u64, t0: u64 },

    /// A forward scan over iterations ran past its cap. Carries the partial
    /// sums reached at the cap so callers can see how far away the target is.
    #[error("forward scan exceeded cap {cap} (sum alpha = {sum_alpha}, sum alpha^2 = {sum_alpha_sq})")]
    ScanCapExceeded {
        cap: u64,
        sum_alpha: f64,
        sum_alpha_sq: f64,
    },

    /// The quantity being minimized is monotone, so no interior optimum exists.
    #[error("no interior minimizer: {0}")]
    NoInteriorMinimum(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
