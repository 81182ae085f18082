use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped so that front ends can map them onto exit codes:
/// input and precondition problems, numerical failures, and violated
/// invariants that the theory guarantees.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("failed to parse profile document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("no permutation brings the profile into staircase form")]
    NoStaircasePermutation,

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("damping underflow at iteration {iterations} (residual {residual:.3e})")]
    DampingUnderflow { iterations: usize, residual: f64 },

    #[error("solve failed at radius {radius:.3e}: {source}")]
    PathFailure {
        radius: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("solve failed at eta {eta:.3e}: {source}")]
    EtaFailure {
        eta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("linear system is singular or ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Coarse classification used by front ends.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidProfile(_)
            | Error::Parse(_)
            | Error::Precondition(_)
            | Error::DimensionCap { .. }
            | Error::NoStaircasePermutation => ErrorKind::Validation,
            Error::NotConverged { .. }
            | Error::DampingUnderflow { .. }
            | Error::IllConditioned { .. }
            | Error::Fit(_) => ErrorKind::Numerical,
            Error::PathFailure { source, .. } | Error::EtaFailure { source, .. } => source.kind(),
            Error::Invariant(_) => ErrorKind::Invariant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Invariant,
}

pub type Result<T> = std::result::Result<T, Error>;
