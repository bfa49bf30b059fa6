use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the optimization toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("parameter space must declare at least one variable")]
    EmptySpace,

    #[error("state {values:?} is not on the grid: {reason}")]
    OffGrid { values: Vec<f64>, reason: String },

    #[error("action {action} is infeasible at state {state:?}")]
    Infeasible { state: Vec<f64>, action: usize },

    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("no feasible action available")]
    NoFeasibleAction,

    #[error("grid of {states} states exceeds the enumeration cap of {cap}")]
    CapExceeded { states: u128, cap: u128 },

    #[error("cannot sample {requested} transitions from a buffer holding {available}")]
    BufferTooSmall { requested: usize, available: usize },

    #[error("truth values have zero variance; R² is undefined")]
    ZeroVariance,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
