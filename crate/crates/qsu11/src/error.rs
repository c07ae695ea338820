use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("q must lie in (0,1), got {0}")]
    InvalidBase(f64),

    #[error("invalid series control: {0}")]
    InvalidControl(&'static str),

    #[error("series or product did not converge within {0} terms")]
    NonConvergence(usize),

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("lower parameter vanishes the term ratio at index {0}")]
    LowerPole(usize),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("floating-point overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge after {doublings} doublings (last change {change:e})")]
    Quadrature { doublings: usize, change: f64 },

    #[error("operator kind {0} is not supported here")]
    UnsupportedKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;
