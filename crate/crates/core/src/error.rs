use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support condition violated: {0}")]
    SupportError(String),
    #[error("argument outside the function domain: {0}")]
    DomainError(String),
    #[error("pseudo-additive composition received an infinite operand")]
    OverflowToInfinity,
    #[error("reference distribution must be full rank (component {index} is zero)")]
    FullRankRequired { index: usize },
    #[error("invalid Gibbs context: {0}")]
    InvalidContext(String),
    #[error("not a rational distribution: {0}")]
    NotRational(String),
    #[error("rationalization precision M must be positive")]
    InvalidM,
    #[error("input must be sorted in non-increasing order")]
    Unsorted,
    #[error("absorbed remainder component is {0}, choose a larger M")]
    DegenerateRemainder(f64),
    #[error("perturbation schedule violates nesting: {0}")]
    ScheduleViolation(String),
    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),
    #[error("alpha = 1 is a pole of this expression; use the scan path")]
    AlphaOne,
    #[error("distributed profile needs an even catalyst dimension, got {0}")]
    OddDimension(usize),
    #[error("epsilon {epsilon} exceeds the positivity limit {limit}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("chi = {chi} outside the open positivity interval ({lo}, {hi})")]
    ChiOutOfRange { chi: f64, lo: f64, hi: f64 },
    #[error("|lambda| = {lambda} exceeds block positivity limit {max}")]
    LambdaOutOfRange { lambda: f64, max: f64 },
    #[error("target mutual information {target} bits not reachable (max {max})")]
    TargetUnreachable { target: f64, max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for diagnostics that need a stable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotADistribution(_) => "NotADistribution",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SupportError(_) => "SupportError",
            Error::DomainError(_) => "DomainError",
            Error::OverflowToInfinity => "OverflowToInfinity",
            Error::FullRankRequired { .. } => "FullRankRequired",
            Error::InvalidContext(_) => "InvalidContext",
            Error::NotRational(_) => "NotRational",
            Error::InvalidM => "InvalidM",
            Error::Unsorted => "Unsorted",
            Error::DegenerateRemainder(_) => "DegenerateRemainder",
            Error::ScheduleViolation(_) => "ScheduleViolation",
            Error::NotStochastic(_) => "NotStochastic",
            Error::AlphaOne => "AlphaOne",
            Error::OddDimension(_) => "OddDimension",
            Error::EpsilonTooLarge { .. } => "EpsilonTooLarge",
            Error::ChiOutOfRange { .. } => "ChiOutOfRange",
            Error::LambdaOutOfRange { .. } => "LambdaOutOfRange",
            Error::TargetUnreachable { .. } => "TargetUnreachable",
        }
    }
}
