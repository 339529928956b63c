//! Binary logistic regression trained by full-batch gradient descent, a
//! one-vs-rest multi-label wrapper, Wald confidence intervals for the
//! coefficients, and a frequency-distribution baseline classifier.

mod baseline;
mod features;
mod intervals;
mod logistic;

pub use baseline::{baseline_predict, baseline_train, BaselineModel};
pub use features::{FeatureMatrix, FeatureRow, Standardizer};
pub use intervals::{coefficient_intervals, inverse_normal_cdf, CoefficientInterval};
pub use logistic::{
    objective, predict_label, predict_proba, predict_proba_matrix, train_logistic,
    train_multilabel, LogisticModel, TrainConfig,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("labels contain a single class; both classes are required")]
    SingleClass,
    #[error("feature {0:?} contains a non-finite value")]
    NonFiniteFeature(String),
    #[error("row count {rows} does not match label count {labels}")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature vector has {got} values, model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("all feature columns were dropped as zero-variance")]
    NoUsableFeatures,
    #[error("training config values must be positive")]
    InvalidConfig,
    #[error("training diverged: loss became non-finite")]
    Divergence,
    #[error("empty label vector")]
    EmptyLabels,
    #[error("observed information matrix is singular at column {0:?}")]
    SingularInformation(String),
    #[error("dimension {name:?}: {source}")]
    Dimension {
        name: String,
        #[source]
        source: Box<TrainError>,
    },
    #[error("duplicate row id {0:?}")]
    DuplicateId(String),
    #[error("feature matrices are not row-aligned (id {left:?} vs {right:?})")]
    Misaligned { left: String, right: String },
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("model file schema version {found} does not match supported version {expected}")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("model file contains a non-finite parameter")]
    NonFiniteModel,
}
