use crate::numerics::NumericsError;

/// Configuration problems, always naming the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("cannot parse `{value}` for key `{key}`")]
    Unparsable { key: String, value: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
    }

    /// The key the error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key } | ConfigError::Unparsable { key, .. } | ConfigError::Invalid { key, .. } => {
                Some(key)
            }
        }
    }
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("domain error: {0}")]
    Domain(String),
    /// The guidance field is undefined near a node of the density.
    #[error("density {density:e} below the node threshold at z = {z:e} cm, t = {t:e} s")]
    NodeProximity { z: f64, t: f64, density: f64 },
    /// A transform that should be real kept an imaginary part above tolerance.
    #[error("imaginary residual {imaginary:e} exceeds {tolerance:e}")]
    NonReal { imaginary: f64, tolerance: f64 },
    #[error("degenerate scenario: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
