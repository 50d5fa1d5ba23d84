use thiserror::Error;

/// Errors raised by the library and the experiment runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "projection box for node {node} is empty at iteration {k}: lower {lower} exceeds upper {upper}"
    )]
    InfeasibleProjection {
        k: u64,
        node: usize,
        lower: f64,
        upper: f64,
    },

    #[error("config `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("enumeration over {n} nodes exceeds the supported limit of {limit}")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
