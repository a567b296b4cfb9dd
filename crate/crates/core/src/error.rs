use std::path::Path;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("non-finite coordinate for {kind} particle {index}")]
    NonFinite { kind: &'static str, index: usize },

    #[error("particle index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("simulation unstable at frame {frame}: particle {particle} has a non-finite state")]
    Instability { frame: usize, particle: usize },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("{path}: {reason}")]
    Format { path: String, reason: String },

    #[error("model is incompatible with this run: {0}")]
    Incompatible(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.display().to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
