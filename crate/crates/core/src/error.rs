//! Error types for every stage of the pipeline.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Dataset construction, ingestion and splitting failures.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("dimension mismatch at line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at line {line}, column {column}")]
    NonFinite { line: usize, column: usize },
    #[error("label {label} out of range at line {line} (k = {k})")]
    LabelOutOfRange { line: usize, label: i64, k: usize },
    #[error("record count mismatch: header declares {declared}, found {found}")]
    RecordCount { declared: usize, found: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),
    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),
    #[error("class {class} has {count} samples, fewer than the {parts} split parts")]
    ClassTooSmall {
        class: usize,
        count: usize,
        parts: usize,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Network construction, training and checkpoint failures.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} output classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("cannot shrink head from {current} to {requested} classes")]
    ShrinkUnsupported { current: usize, requested: usize },
    #[error("non-finite loss (ce = {ce}, triplet = {triplet}) at step {step}")]
    NonFiniteLoss { ce: f64, triplet: f64, step: u64 },
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate variance: every point coincides with its centroid")]
    DegenerateVariance,
    #[error("invalid cluster count {0}")]
    InvalidK(usize),
}

#[derive(Debug, Error)]
pub enum MahalError {
    #[error("all training features are constant; total variance is zero")]
    ZeroVariance,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("pseudo-class {0} has no samples")]
    EmptyClass(usize),
    #[error("covariance is singular even with diagonal jitter {jitter:e}")]
    SingularCovariance { jitter: f64 },
    #[error("corrupt head checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("no out-of-distribution samples")]
    NoOodSamples,
    #[error("no in-distribution samples")]
    NoIdSamples,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum RelabelError {
    #[error("class {0} is absent from the validation set")]
    ClassAbsent(usize),
    #[error("label map invariant violated: {0}")]
    Invariant(String),
}

/// Top-level error; `exit_code` maps it onto the command-line contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Mahal(#[from] MahalError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Relabel(#[from] RelabelError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage/config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Nn(NnError::NonFiniteLoss { .. }) => 3,
            Error::Mahal(MahalError::SingularCovariance { .. }) => 3,
            Error::Cluster(ClusterError::DegenerateVariance) => 3,
            Error::Nn(NnError::InvalidConfig(_)) => 1,
            _ => 2,
        }
    }
}
