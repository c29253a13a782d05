use thiserror::Error;

/// Errors produced by the segmentation engine and its file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("interval set parse error: {0}")]
    IntervalParse(String),

    #[error("observation {index} is not finite")]
    NonFinite { index: usize },

    #[error("observation {index} is negative ({value}); poisson loss needs counts >= 0")]
    NegativeObservation { index: usize, value: f64 },

    #[error("cost functions of different loss kinds cannot be combined")]
    LossMismatch,

    #[error("degenerate cost function: {0}")]
    DegenerateCost(&'static str),

    #[error("signal is empty")]
    EmptySignal,

    #[error("k_max = {k_max} is out of range for a signal of length {n}")]
    SegmentCount { k_max: usize, n: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("classical DP requested for n = {n}, above the cap of {cap} (raise it with FPSEG_CLASSICAL_CAP)")]
    ClassicalCap { n: usize, cap: usize },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } | Error::IntervalParse(_) => "interval",
            Error::NonFinite { .. } | Error::NegativeObservation { .. } | Error::EmptySignal => {
                "input"
            }
            Error::LossMismatch | Error::DegenerateCost(_) => "cost",
            Error::SegmentCount { .. } | Error::IndexOutOfRange(_) => "range",
            Error::EmptyGrid => "grid",
            Error::InvalidSpec(_) | Error::Config(_) => "config",
            Error::ClassicalCap { .. } => "classical_cap",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
