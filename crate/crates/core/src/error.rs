use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("convexity parameter must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("interpolation parameter t = {0} is outside [0, 1]")]
    InvalidInterpolation(f64),

    #[error("Hessian characterization unavailable for objective {0} (not C2 or no Hessian supplied)")]
    HessianUnavailable(usize),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("simplex grid with m = {m}, resolution = {resolution} exceeds the cap of {cap} points")]
    GridTooLarge { m: usize, resolution: usize, cap: usize },

    #[error("{count} of {total} weighted subproblems did not reach the requested tolerance")]
    NotConverged { count: usize, total: usize },

    #[error("at least {required} samples are required, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
