use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in model construction, simulation or output.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally inconsistent inputs (dimension or size mismatch, bad ranges).
    #[error("configuration error: {0}")]
    Config(String),

    /// Scenario file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A scenario key is missing, unknown or out of range.
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    /// A quantity carried the wrong unit suffix.
    #[error("unit mismatch for `{key}`: expected {expected}, found `{found}`")]
    Unit {
        key: String,
        expected: &'static str,
        found: String,
    },

    /// Function called outside its stated domain.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Two agents occupy the same position.
    #[error("collision between agents {0} and {1}")]
    Collision(usize, usize),

    /// An initially connected pair reached the sensing radius.
    #[error("connectivity barrier violated between agents {a} and {b} (distance {distance} m)")]
    BarrierViolation { a: usize, b: usize, distance: f64 },

    /// Gravity evaluated at the centre of the Earth.
    #[error("gravity singularity: orbit radius vanished")]
    Singularity,

    #[error("numerical divergence at t = {t} s: {what}")]
    Divergence { t: f64, what: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }
}
