use thiserror::Error;

use crate::domain::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("pair index {index} out of range for {len} pairs")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("pair {0} cannot be matched with itself")]
    SelfMatch(usize),

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid generator configuration: {0}")]
    InvalidGenConfig(String),

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("brute-force oracle limited to {limit} pairs, model has {pairs}")]
    OracleTooLarge { pairs: usize, limit: usize },

    #[error("unknown blood type {0:?}")]
    UnknownBloodType(String),

    #[error("instance file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
