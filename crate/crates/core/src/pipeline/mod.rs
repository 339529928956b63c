//! End-to-end experiments: corpus ingestion, feature assembly, repeated-split
//! evaluation, coefficient reports, correlation reports, and artifact
//! persistence.

mod artifacts;
mod experiments;
mod ingest;

pub use artifacts::{load_artifacts, save_artifacts, write_manifest, Artifacts};
pub use experiments::{
    evaluate_repeated, likelihood_features, read_documents, run_correlation_report,
    run_mf_experiment, run_partisanship_experiment, score_corpus_to_csv, train_mf_models,
    BuiltFeatures, CoefficientReport, CorrelationReportBundle, FeatureBuilder, MfDimensionRow,
    MfExperimentReport, PartisanRow, PartisanshipReport, SplitEvaluation,
};
pub use ingest::{
    builtin_topics, builtin_topics_json, ingest_annotations, ingest_external_features,
    ingest_headlines, load_topics, AlignmentReport, AnnotationCorpus, AnnotationRecord,
    HeadlineIngestReport, HeadlineRecord, SourceLeanings, TopicSpec,
};

use crate::axes::AxisError;
use crate::classifier::{TrainConfig, TrainError};
use crate::embedding::EmbeddingError;
use crate::eval::EvalError;
use crate::lexicon::LexiconError;
use crate::scorer::ScoreError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Axis(#[from] AxisError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    OtherIo(#[from] std::io::Error),
    #[error("{path}: missing required column ({column})")]
    MissingColumn { path: String, column: String },
    #[error("row {row}: cannot parse {column:?} value {value:?} as a count")]
    MalformedCount {
        row: usize,
        column: String,
        value: String,
    },
    #[error("record {id:?}: {dimension:?} votes exceed the annotator count")]
    VotesExceedAnnotators { id: String, dimension: String },
    #[error("record {id:?}: annotator count {count} is below the minimum of 3")]
    TooFewAnnotators { id: String, count: u64 },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("{0}: no rows kept")]
    NoRowsKept(String),
    #[error("external features share no id with the corpus")]
    NoOverlap,
    #[error("aggregation target {target:?} refers to unknown column {column:?}")]
    UnknownAggregationColumn { target: String, column: String },
    #[error("{0} is required for this run")]
    MissingInput(String),
    #[error("feature mode {mode} unavailable: {reason}")]
    ModeUnavailable { mode: FeatureMode, reason: String },
}

/// Which feature family feeds the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    FrameAxis,
    External,
    Combined,
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FeatureMode::FrameAxis => "frame_axis",
            FeatureMode::External => "external",
            FeatureMode::Combined => "combined",
        };
        f.write_str(name)
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frame_axis" => Ok(FeatureMode::FrameAxis),
            "external" => Ok(FeatureMode::External),
            "combined" => Ok(FeatureMode::Combined),
            other => Err(format!(
                "unknown feature mode {other:?} (expected frame_axis, external, or combined)"
            )),
        }
    }
}

fn default_train_fraction() -> f64 {
    0.75
}
fn default_splits() -> usize {
    10
}
fn default_min_votes() -> u64 {
    2
}

/// Everything an experiment run needs. Deserializable from the `--config`
/// JSON file; unset fields fall back to CLI flags or bundled defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub embeddings: Option<PathBuf>,
    pub expected_dimension: Option<usize>,
    pub normalize_embeddings: bool,
    /// Lexicon JSON; the bundled six-dimension default when unset.
    pub lexicon: Option<PathBuf>,
    /// Headline or document corpus CSV.
    pub corpus: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// External per-document features for the active corpus.
    pub features: Option<PathBuf>,
    /// External per-document features for the annotation corpus.
    pub annotation_features: Option<PathBuf>,
    pub leanings: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    /// Directory of previously trained per-dimension models.
    pub models_dir: Option<PathBuf>,
    pub mode: Option<FeatureMode>,
    pub train_fraction: f64,
    pub splits: usize,
    pub seed: u64,
    pub min_votes: u64,
    /// Optional vote-column aggregation: new dimension -> source columns
    /// (merged by taking the per-row maximum).
    pub aggregate: Option<BTreeMap<String, Vec<String>>>,
    pub classifier: TrainConfig,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            embeddings: None,
            expected_dimension: None,
            normalize_embeddings: false,
            lexicon: None,
            corpus: None,
            annotations: None,
            features: None,
            annotation_features: None,
            leanings: None,
            topics: None,
            models_dir: None,
            mode: None,
            train_fraction: default_train_fraction(),
            splits: default_splits(),
            seed: 0,
            min_votes: default_min_votes(),
            aggregate: None,
            classifier: TrainConfig::default(),
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn mode(&self) -> FeatureMode {
        self.mode.unwrap_or(FeatureMode::FrameAxis)
    }
}

pub(crate) fn io_error(path: &std::path::Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}
