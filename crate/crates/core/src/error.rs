use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Configuration problems, always naming the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed configuration document: {0}")]
    Malformed(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}` conflicts with the `{scenario}` scenario preset: {reason}")]
    ScenarioConflict {
        key: String,
        scenario: String,
        reason: String,
    },
}

impl ConfigError {
    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// The configuration key this error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Malformed(_) => None,
            ConfigError::UnknownKey(k) | ConfigError::Missing(k) => Some(k),
            ConfigError::Invalid { key, .. } | ConfigError::ScenarioConflict { key, .. } => {
                Some(key)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("load evaluated at t = {t} outside the tabulated range [{start}, {end}]")]
    LoadOutOfRange { t: f64, start: f64, end: f64 },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("shape mismatch: expected {expected} values, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("integration failed at t = {t} (step size {step:e}): {reason}")]
    Integration { t: f64, step: f64, reason: String },
}
