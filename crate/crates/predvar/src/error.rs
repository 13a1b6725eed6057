//! Error type shared by the whole crate.
//!
//! Variants are grouped the same way the CLI groups exit codes:
//! configuration/usage problems, data problems, and training/numeric problems.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad spec, bad fractions, out-of-range knobs.
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse: empty inputs, too-few members, mismatched lengths.
    #[error("usage error: {0}")]
    Usage(String),

    /// Bad data fed to an otherwise valid model/operation.
    #[error("input error: {0}")]
    Input(String),

    /// Malformed file contents.
    #[error("parse error: {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Training diverged or failed.
    #[error("training error at epoch {epoch}, batch {batch}: {msg}")]
    Training {
        epoch: usize,
        batch: usize,
        msg: String,
    },

    /// A numeric result is undefined for the given inputs (e.g. correlation of
    /// a constant vector).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a member index to a training failure (ensemble context).
    pub fn with_member(self, member: usize) -> Self {
        match self {
            Error::Training { epoch, batch, msg } => Error::Training {
                epoch,
                batch,
                msg: format!("member {member}: {msg}"),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
