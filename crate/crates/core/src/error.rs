use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown {kind} `{name}` (registered: {registered})")]
    UnknownPreset {
        kind: &'static str,
        name: String,
        registered: String,
    },

    #[error("integration blow-up at t={t_ms} ms: `{variable}` is not finite")]
    NonFinite { variable: String, t_ms: f64 },

    #[error("bin grid undefined: need at least 2 reference spikes in the ON phase, got {found}")]
    GridUndefined { found: usize },

    #[error("bit streams differ in length ({observed} vs {expected})")]
    LengthMismatch { observed: usize, expected: usize },

    #[error("accuracy undefined for all-zero confusion counts")]
    EmptyConfusion,

    #[error("sweep cell {cell} has no successful trials")]
    EmptyCell { cell: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownPreset { .. } => 1,
            Error::NonFinite { .. }
            | Error::GridUndefined { .. }
            | Error::LengthMismatch { .. }
            | Error::EmptyConfusion
            | Error::EmptyCell { .. } => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
        }
    }
}
