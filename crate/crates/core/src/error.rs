use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("the zero wave vector has no Stokes eigenvalue (fields are zero-mean)")]
    ZeroMode,

    #[error("modal cutoff {requested} exceeds the {available} available modes")]
    CutoffTooLarge { requested: usize, available: usize },

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("observation resolution mismatch: {0}")]
    ResolutionMismatch(String),

    #[error("observation series is empty")]
    EmptySeries,

    #[error("invalid observation series: {0}")]
    InvalidSeries(String),

    #[error("malformed tetrahedron topology: {0}")]
    MalformedTopology(String),

    #[error("cannot serialize report: {0}")]
    Serialize(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
