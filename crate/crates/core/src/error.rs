use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("step {step} lies outside {{-1,0,1}}^{dim}")]
    StepOutOfRange { step: String, dim: usize },
    #[error("duplicate step {0}")]
    DuplicateStep(String),
    #[error("weight {weight} of step {step} is not positive")]
    NonPositiveWeight { step: String, weight: String },
    #[error("model has no steps")]
    EmptyModel,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point has a zero coordinate at index {0}")]
    ZeroCoordinate(usize),
    #[error("hypothesis H1 violated: steps lie in the half-space with normal {witness}")]
    H1Violated { witness: String },
    #[error("generator {index} is degenerate (A or C vanishes identically)")]
    DegenerateGenerator { index: usize },
    #[error("evaluation pole while applying generator {index}")]
    Pole { index: usize },
    #[error("sampling failed after {attempts} attempts: {reason}")]
    SamplingFailure { attempts: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("critical point solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point is not fixed by generator {index} (deviation {deviation:e})")]
    NotFixed { index: usize, deviation: f64 },
    #[error("ambiguous matrix identification: distance {distance:e} within twice the tolerance")]
    AmbiguousDedup { distance: f64 },
    #[error("matrix is not positive definite (eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("degenerate second derivative along axis {0}")]
    DegenerateAxis(usize),
    #[error("kernel curve is not in the genus-1 regime: {0}")]
    GenusDegenerate(String),
    #[error("elliptic computation failed: {0}")]
    Elliptic(String),
    #[error("no nome convention satisfies the modulus identity (residuals {0:e}, {1:e})")]
    NomeConvention(f64, f64),
    #[error("search space of {0} models exceeds the limit")]
    SearchOverflow(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
