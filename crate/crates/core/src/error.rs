use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state kind does not match the system: {0}")]
    KindMismatch(&'static str),

    #[error("state outside the system domain: {0}")]
    OutOfDomain(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pseudo-orbit gap {gap} exceeds delta {delta} at index {index}")]
    PseudoOrbitGap { index: usize, gap: f64, delta: f64 },

    #[error("interval refinement needed more than {cap} intervals at step {step}")]
    ResourceCap { cap: usize, step: usize },

    #[error("empty constraint set: {0}")]
    EmptyConstraint(String),

    #[error("no decomposition within {target} under the denominator cap; best distance {achieved}")]
    Unattainable { achieved: f64, target: f64 },

    #[error("schedule length {length} exceeds cap {cap} at level {level}")]
    ScheduleOverflow { level: usize, length: u128, cap: u64 },

    #[error("block budget exhausted: {sampled} sampled, {accepted} accepted, none usable")]
    BudgetExhausted { sampled: usize, accepted: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
