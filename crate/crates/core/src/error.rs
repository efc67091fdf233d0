use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown dataset format for {0}")]
    UnknownFormat(PathBuf),
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("dataset needs at least 2 distinct classes, found {0}")]
    TooFewClasses(usize),
    #[error("dataset `{0}` has no usable columns after preprocessing")]
    EmptyAfterPreprocessing(String),
    #[error("invalid hyperparameter {name} = {value}: {reason}")]
    InvalidHyperparameter {
        name: String,
        value: String,
        reason: String,
    },
    #[error("k = {k} exceeds the training size {n}")]
    NeighborsExceedTrainingSize { k: usize, n: usize },
    #[error("SMO did not converge within {iterations} pair updates (violation {violation:.3e})")]
    SmoNotConverged { iterations: usize, violation: f64 },
    #[error("instance width {found} does not match training width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("class {class} has {count} instances, fewer than k = {k} folds")]
    ClassTooSmall { class: usize, count: usize, k: usize },
    #[error("metric requires both classes to be present")]
    SingleClass,
    #[error("class {0} has no instances in the reference labels")]
    EmptyClass(usize),
    #[error("Wilcoxon test needs at least 3 nonzero differences, found {0}")]
    InsufficientPairs(usize),
    #[error("defaults list must contain the reference default ({0})")]
    MissingReferenceDefault(String),
    #[error("tuning outcome for `{0}` is incomplete")]
    IncompleteOutcome(String),
    #[error("no meta-feature vector for labeled dataset `{0}`")]
    MissingVector(String),
    #[error("meta-feature schema mismatch: model expects {expected} features, extractor produced {found}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("setup `{setup}` is not supported for learner `{learner}`: {reason}")]
    UnsupportedSetup {
        learner: String,
        setup: String,
        reason: String,
    },
    #[error("meta-feature `{name}` is not finite")]
    NonFiniteMetaFeature { name: String },
    #[error("missing artifact {path}; run `metatune {producer}` first")]
    MissingArtifact { path: PathBuf, producer: String },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
