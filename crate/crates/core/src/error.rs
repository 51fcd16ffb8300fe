use thiserror::Error;

use crate::scalar::QuadratureResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure surfaced by the library.
///
/// Variant names are stable: the CLI reports them verbatim (see [`Error::name`]).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("argument {0} is a pole of the function")]
    PoleArgument(String),
    #[error("base {0} of a principal power must be positive")]
    NonPositiveBase(f64),
    #[error("quadrature tolerance not met: best estimate {best:?}")]
    ToleranceNotMet { best: QuadratureResult },
    #[error("polynomial decay exponent {0} must exceed 1")]
    SlowDecay(f64),
    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("profile total mass {0} is not 1")]
    NotNormalized(f64),
    #[error("kernel matrix is numerically singular (condition estimate {condition:e})")]
    SingularKernel { condition: f64 },
    #[error("kernel is not positive definite (minimal eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("order {requested} exceeds table order {available}")]
    OrderExceeded { requested: usize, available: usize },
    #[error("leading coefficient vanishes")]
    ZeroLeadingCoefficient,
    #[error("pole at {0} is not on the exponent lattice")]
    OffLattice(String),
    #[error("{0}")]
    OutsideStrip(String),
    #[error("{0}")]
    InsufficientDepth(String),
    #[error("pole near the boundary of the scan rectangle at {0}")]
    BoundaryPole(String),
    #[error("sampled function does not follow a power law: {0}")]
    NonPowerLaw(String),
    #[error("least-squares system is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("fit methods disagree: {0}")]
    DisagreeingMethods(String),
    #[error("branch of a non-integer power is ambiguous: {0}")]
    BranchAmbiguity(String),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("metric violation: {0}")]
    MetricViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::PoleArgument(_) => "PoleArgument",
            Error::NonPositiveBase(_) => "NonPositiveBase",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::SlowDecay(_) => "SlowDecay",
            Error::EvaluationFailure(_) => "EvaluationFailure",
            Error::NotPrime(_) => "NotPrime",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotNormalized(_) => "NotNormalized",
            Error::SingularKernel { .. } => "SingularKernel",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::OrderExceeded { .. } => "OrderExceeded",
            Error::ZeroLeadingCoefficient => "ZeroLeadingCoefficient",
            Error::OffLattice(_) => "OffLattice",
            Error::OutsideStrip(_) => "OutsideStrip",
            Error::InsufficientDepth(_) => "InsufficientDepth",
            Error::BoundaryPole(_) => "BoundaryPole",
            Error::NonPowerLaw(_) => "NonPowerLaw",
            Error::IllConditioned(_) => "IllConditioned",
            Error::DisagreeingMethods(_) => "DisagreeingMethods",
            Error::BranchAmbiguity(_) => "BranchAmbiguity",
            Error::SchemaError(_) => "SchemaError",
            Error::MetricViolation(_) => "MetricViolation",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
