use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
///
/// Variants are grouped by how a caller should react: bad input, a request
/// outside the regime of the chosen evaluation path, a violated
/// admissibility/integrability condition, or a numerical failure.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum DunklError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative multiplicity {value} for root orbit {orbit}")]
    NegativeMultiplicity { orbit: usize, value: f64 },

    #[error("multiplicity is not constant on root orbits: {0}")]
    MultiplicityNotOrbitConstant(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group closure exceeded {cap} elements; the root list is not a finite reflection system")]
    ClosureOverflow { cap: usize },

    #[error("outside evaluation regime: {0}")]
    Regime(String),

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("integrability condition failed: {0}")]
    ConditionFailed(String),

    #[error("integrator step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("numerically singular system: {0}")]
    Singular(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, DunklError>;
