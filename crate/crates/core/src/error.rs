//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("factor mismatch: expected {expected}, found {found}")]
    FactorMismatch { expected: String, found: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("matrix is not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },

    #[error("pfaffian requires even dimension, got {0}")]
    OddDimension(usize),

    #[error("element is not a maximal tripotent: {0}")]
    NotMaximalTripotent(String),

    #[error("boundary sampler produced an invalid point for {factor}: {detail}")]
    SamplerValidation { factor: String, detail: String },

    #[error("symbol nearly vanishes: |f| = {value:.3e} against scale {scale:.3e}")]
    NearZero { value: f64, scale: f64 },

    #[error("loop is not closed: |f(0) - f(2pi)| = {0:.3e}")]
    OpenLoop(f64),

    #[error("phase refinement exceeded depth {0}")]
    RefinementDepth(usize),

    #[error("total phase change is not an integer multiple of 2pi (offset {0:.3e})")]
    NonIntegralWinding(f64),

    #[error("base points disagree on the winding of factor {factor}: {windings:?}")]
    BasePointDisagreement { factor: usize, windings: Vec<i64> },

    #[error("winding {winding} of factor {factor} is not divisible by its rank {rank}")]
    NotDivisible { factor: usize, winding: i64, rank: usize },

    #[error("quadrature order too low: {0}")]
    QuadratureTooCoarse(String),

    #[error("basis normalization check failed for degree {degree}: {detail}")]
    Normalization { degree: usize, detail: String },

    #[error("basis index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("two-level decomposition leaks {leak:.3e} outside levels -1 and 0")]
    Leak { leak: f64 },

    #[error("sector mismatch {residual:.3e} above tolerance {tol:.1e}")]
    SectorMismatch { residual: f64, tol: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("invalid symbol spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearZero { .. }
                | Error::OpenLoop(_)
                | Error::RefinementDepth(_)
                | Error::NonIntegralWinding(_)
                | Error::BasePointDisagreement { .. }
                | Error::NotDivisible { .. }
                | Error::SamplerValidation { .. }
                | Error::Leak { .. }
                | Error::SectorMismatch { .. }
                | Error::Normalization { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
