use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not hyperbolic: |trace| = {trace} is within 2 + 1e-12")]
    NotHyperbolic { trace: f64 },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("integration failure at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("focal blow-up of the Riccati solution at t = {time}")]
    FocalBlowUp { time: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("trajectory carries no parallel frame")]
    MissingFrame,

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("{rejected} of {total} sampled vertical curves are not geodesics")]
    ExcessiveRejection { rejected: usize, total: usize },

    #[error("config syntax error at line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    ConfigValue { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn value(key: &str, reason: impl Into<String>) -> Self {
        Error::ConfigValue {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Input problems (bad config, bad files, bad arguments, points outside
    /// the domain, unsupported metric kinds) as opposed to numerical failures. The CLI maps the former to exit code 2 and the
    /// latter to exit code 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ConfigSyntax { .. }
                | Error::UnknownKey(_)
                | Error::ConfigValue { .. }
                | Error::Io { .. }
                | Error::Parse { .. }
                | Error::Domain(_)
                | Error::Unsupported(_)
                | Error::NotHyperbolic { .. }
        )
    }
}
