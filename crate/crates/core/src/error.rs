use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the geometry kernels, the analysis pipeline and file IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular pair: segments intersect (separation {separation:e})")]
    SingularPair { separation: f64 },

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("side too coarse: side {side} has {segments} segments, need at least {required}")]
    SideTooCoarse {
        side: usize,
        segments: usize,
        required: usize,
    },

    #[error("invalid edge selection: {0}")]
    InvalidSelection(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vector too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("undefined correlation: zero variance input")]
    UndefinedCorrelation,

    #[error("undefined distance: {0}")]
    UndefinedDistance(String),

    #[error("resample required: curves have {left} and {right} vertices")]
    ResampleRequired { left: usize, right: usize },

    #[error("empty curve")]
    EmptyCurve,

    #[error("degenerate separation: centroids of classes {a} and {b} coincide")]
    DegenerateSeparation { a: String, b: String },

    #[error("distance between samples {i} and {j} failed: {source}")]
    PairDistance {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid fold: {0}")]
    InvalidFold(String),

    #[error("fold degenerated the boundary after {attempts} attempts: {reason}")]
    DegenerateFold { attempts: usize, reason: String },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: field `{field}`: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularPair { .. }
            | Error::UndefinedCorrelation
            | Error::UndefinedDistance(_)
            | Error::DegenerateSeparation { .. } => true,
            Error::PairDistance { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
