use std::path::PathBuf;

/// Errors raised by the estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A measured or intermediate signal was NaN or infinite.
    #[error("non-finite signal `{signal}` at t = {t}")]
    NonFinite { signal: &'static str, t: f64 },

    /// A function required to stay away from zero crossed its floor.
    #[error("singularity: |{what}| = {value:e} fell below floor {floor:e} at t = {t}")]
    Singularity {
        what: &'static str,
        value: f64,
        floor: f64,
        t: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Invalid or inconsistent configuration, reported per field.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A monotonicity bound could not be established.
    #[error("monotonicity: {0}")]
    Monotone(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Returns `value` unchanged if finite, otherwise a [`Error::NonFinite`].
#[inline]
pub(crate) fn finite(signal: &'static str, value: f64, t: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { signal, t })
    }
}
