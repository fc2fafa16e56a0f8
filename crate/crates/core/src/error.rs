use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("non-monotone timestamp at line {line}")]
    NonMonotoneTimestamp { line: usize },

    #[error("non-finite value at line {line}")]
    NonFiniteValue { line: usize },

    #[error("invalid gait profile: {0}")]
    InvalidProfile(String),

    #[error("insufficient data: window spans {have:.3} s, need {need:.3} s")]
    InsufficientData { have: f64, need: f64 },

    #[error("out-of-order step at t = {t} (last step at {last})")]
    OutOfOrderStep { t: f64, last: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("infeasible plan: {agents} agents but only {markers} markers")]
    Infeasible { agents: usize, markers: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
