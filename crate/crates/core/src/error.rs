use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input.
    Input,
    /// A mathematical precondition of the model does not hold.
    Hypothesis,
    /// A numerical procedure failed.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("frequency {lambda} is not a node of the sampled density grid")]
    OffGrid { lambda: f64 },

    #[error("non-finite value encountered at lambda = {lambda}")]
    NonFinite { lambda: f64 },

    #[error("minimality condition violated (min eigenvalue {min_eigenvalue:e}, condition number {condition:e})")]
    MinimalityViolation { min_eigenvalue: f64, condition: f64 },

    #[error("trigonometric polynomial is not positive definite on the grid (min eigenvalue {min_eigenvalue:e})")]
    NotFactorizable { min_eigenvalue: f64 },

    #[error("spectral factorization did not converge after {iterations} block rows (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("pattern cannot be blocked: {0}")]
    NotBlockable(String),

    #[error("observation at index {index} is required by the filter but missing")]
    MissingObservation { index: i64 },

    #[error("theorem hypothesis violated: {reason} (min eigenvalue {min_eigenvalue:e})")]
    HypothesisViolated { reason: String, min_eigenvalue: f64 },

    #[error("leading functional coefficient a(0) is zero")]
    ZeroLeadCoefficient,

    #[error("vector is zero")]
    ZeroVector,

    #[error("split system is rank deficient (rank {rank} of {expected})")]
    UnderdeterminedSystem { rank: usize, expected: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("candidate {index} is outside the admissible class (constraint deviation {deviation:e})")]
    CandidateOutOfClass { index: usize, deviation: f64 },

    #[error("generator is not stable (companion spectral radius {spectral_radius})")]
    UnstableModel { spectral_radius: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::OffGrid { .. }
            | Error::NotBlockable(_)
            | Error::MissingObservation { .. }
            | Error::ZeroLeadCoefficient
            | Error::ZeroVector
            | Error::Unsupported(_) => ErrorClass::Input,
            Error::MinimalityViolation { .. }
            | Error::NotFactorizable { .. }
            | Error::HypothesisViolated { .. }
            | Error::CandidateOutOfClass { .. }
            | Error::UnstableModel { .. } => ErrorClass::Hypothesis,
            Error::NonFinite { .. }
            | Error::ConvergenceFailure { .. }
            | Error::SingularSystem { .. }
            | Error::UnderdeterminedSystem { .. } => ErrorClass::Numerical,
        }
    }
}
