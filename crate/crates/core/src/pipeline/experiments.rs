//! Experiment orchestration: feature building per split, repeated-split
//! training/evaluation, partisanship classification with coefficient
//! reports, and correlation reports.

use super::ingest::{
    ingest_annotations, ingest_external_features, ingest_headlines, load_topics, AnnotationCorpus,
    HeadlineRecord, SourceLeanings, TopicSpec,
};
use super::{ExperimentConfig, FeatureMode, PipelineError};
use crate::axes::{build_axis_set, AxisSet};
use crate::classifier::{
    baseline_predict, baseline_train, coefficient_intervals, predict_label, predict_proba,
    train_logistic, train_multilabel, CoefficientInterval, FeatureMatrix, FeatureRow,
    LogisticModel, TrainConfig,
};
use crate::embedding::{load_embeddings_with, EmbeddingStore, LoadOptions};
use crate::eval::{
    correlation_matrix, mean_metrics, metrics, split, CorrelationMatrix, MeanMetrics,
    MetricsReport, SplitSpec,
};
use crate::lexicon::{parse_lexicon, MoralLexicon};
use crate::scorer::{compute_baselines, feature_names, score_bags, TokenBag};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Inputs needed to materialize a feature matrix for one split.
///
/// Frame-axis features depend on the split: the intensity baseline is
/// computed on the training documents only and then applied to every row.
/// External features are split-independent.
pub struct FeatureBuilder<'a> {
    mode: FeatureMode,
    ids: Vec<String>,
    frame: Option<FrameInputs<'a>>,
    external: Option<FeatureMatrix>,
}

struct FrameInputs<'a> {
    docs: Vec<(String, TokenBag)>,
    axes: AxisSet,
    store: &'a EmbeddingStore,
}

/// A materialized feature matrix plus the axis set (with baselines) that
/// produced any frame-axis columns in it.
pub struct BuiltFeatures {
    pub matrix: FeatureMatrix,
    pub axes: Option<AxisSet>,
    pub oov_only: usize,
}

impl<'a> FeatureBuilder<'a> {
    pub fn frame_axis(
        docs: Vec<(String, TokenBag)>,
        axes: AxisSet,
        store: &'a EmbeddingStore,
    ) -> FeatureBuilder<'a> {
        FeatureBuilder {
            mode: FeatureMode::FrameAxis,
            ids: docs.iter().map(|(id, _)| id.clone()).collect(),
            frame: Some(FrameInputs { docs, axes, store }),
            external: None,
        }
    }

    pub fn external(matrix: FeatureMatrix) -> FeatureBuilder<'static> {
        FeatureBuilder {
            mode: FeatureMode::External,
            ids: matrix.ids().iter().map(|s| s.to_string()).collect(),
            frame: None,
            external: Some(matrix),
        }
    }

    /// Combined features require the two sources to cover the same ids in
    /// the same order.
    pub fn combined(
        docs: Vec<(String, TokenBag)>,
        axes: AxisSet,
        store: &'a EmbeddingStore,
        external: FeatureMatrix,
    ) -> Result<FeatureBuilder<'a>, PipelineError> {
        let frame_ids: Vec<&str> = docs.iter().map(|(id, _)| id.as_str()).collect();
        if frame_ids != external.ids() {
            return Err(PipelineError::ModeUnavailable {
                mode: FeatureMode::Combined,
                reason: "frame and external feature rows are not aligned".to_string(),
            });
        }
        Ok(FeatureBuilder {
            mode: FeatureMode::Combined,
            ids: docs.iter().map(|(id, _)| id.clone()).collect(),
            frame: Some(FrameInputs { docs, axes, store }),
            external: Some(external),
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Features with intensity baselines computed on the given training rows.
    pub fn build(&self, train_indices: &[usize]) -> Result<BuiltFeatures, PipelineError> {
        let frame_part = match &self.frame {
            Some(inputs) => Some(self.build_frame(inputs, train_indices)?),
            None => None,
        };
        match self.mode {
            FeatureMode::FrameAxis => Ok(frame_part.expect("frame inputs present")),
            FeatureMode::External => Ok(BuiltFeatures {
                matrix: self.external.clone().expect("external matrix present"),
                axes: None,
                oov_only: 0,
            }),
            FeatureMode::Combined => {
                let frame = frame_part.expect("frame inputs present");
                let joined = FeatureMatrix::concat_columns(
                    &frame.matrix,
                    self.external.as_ref().expect("external matrix present"),
                )?;
                Ok(BuiltFeatures {
                    matrix: joined,
                    axes: frame.axes,
                    oov_only: frame.oov_only,
                })
            }
        }
    }

    /// Features with baselines computed on every row (no held-out side).
    pub fn build_full(&self) -> Result<BuiltFeatures, PipelineError> {
        let all: Vec<usize> = (0..self.ids.len()).collect();
        self.build(&all)
    }

    fn build_frame(
        &self,
        inputs: &FrameInputs<'_>,
        train_indices: &[usize],
    ) -> Result<BuiltFeatures, PipelineError> {
        let train_bags: Vec<TokenBag> = train_indices
            .iter()
            .map(|&i| inputs.docs[i].1.clone())
            .collect();
        let mut axes = inputs.axes.clone();
        compute_baselines(&train_bags, &mut axes, inputs.store)?;
        let scores = score_bags(&inputs.docs, &axes, inputs.store)?;
        let oov_only = scores.iter().filter(|s| s.oov_only).count();
        let rows: Vec<FeatureRow> = scores
            .iter()
            .map(|s| FeatureRow {
                id: s.document_id.clone(),
                values: s.flat(),
            })
            .collect();
        let matrix = FeatureMatrix::new(feature_names(&axes), rows)?;
        Ok(BuiltFeatures {
            matrix,
            axes: Some(axes),
            oov_only,
        })
    }
}

/// Mean metrics over repeated seeded splits, for the model and for the
/// frequency baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub metrics: MeanMetrics,
    pub baseline: MeanMetrics,
}

/// Repeated-split evaluation: split k uses seed `base_seed + k`. Splits run
/// in parallel under the `parallel` feature; per-split results are collected
/// in order and averaged sequentially, so the outcome does not depend on the
/// feature flag.
pub fn evaluate_repeated(
    builder: &FeatureBuilder<'_>,
    labels: &[u8],
    train_fraction: f64,
    splits: usize,
    base_seed: u64,
    classifier: TrainConfig,
) -> Result<SplitEvaluation, PipelineError> {
    assert_eq!(builder.len(), labels.len(), "labels must align with rows");
    let run_one = |k: usize| -> Result<(MetricsReport, MetricsReport), PipelineError> {
        let seed = base_seed.wrapping_add(k as u64);
        let indices: Vec<usize> = (0..builder.len()).collect();
        let (train_idx, test_idx) = split(
            &indices,
            SplitSpec {
                train_fraction,
                seed,
            },
        )?;
        let built = builder.build(&train_idx)?;
        let train_matrix = built.matrix.subset(&train_idx);
        let train_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
        let model = train_logistic(&train_matrix, &train_labels, classifier)?;

        let mut predicted = Vec::with_capacity(test_idx.len());
        let mut truth = Vec::with_capacity(test_idx.len());
        for &i in &test_idx {
            predicted.push(predict_label(&model, &built.matrix.rows()[i].values, 0.5)?);
            truth.push(labels[i]);
        }
        let model_report = metrics(&predicted, &truth)?;

        let baseline_model = baseline_train(&train_labels, seed)?;
        let baseline_predictions = baseline_predict(&baseline_model, test_idx.len());
        let baseline_report = metrics(&baseline_predictions, &truth)?;
        Ok((model_report, baseline_report))
    };

    #[cfg(feature = "parallel")]
    let results: Result<Vec<_>, _> = (0..splits).into_par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<_>, _> = (0..splits).map(run_one).collect();
    let results = results?;

    let model_reports: Vec<MetricsReport> = results.iter().map(|(m, _)| m.clone()).collect();
    let baseline_reports: Vec<MetricsReport> = results.iter().map(|(_, b)| b.clone()).collect();
    Ok(SplitEvaluation {
        metrics: mean_metrics(&model_reports)?,
        baseline: mean_metrics(&baseline_reports)?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfDimensionRow {
    pub dimension: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub baseline_f1: f64,
    pub baseline_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfExperimentReport {
    pub mode: FeatureMode,
    pub rows: Vec<MfDimensionRow>,
    pub documents_used: usize,
    pub documents_dropped_without_features: usize,
    pub oov_only_documents: usize,
}

impl MfExperimentReport {
    /// Per-dimension metrics table with a leading cross-dimension average
    /// row.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "dimension",
            "precision",
            "recall",
            "f1",
            "accuracy",
            "baseline_f1",
            "baseline_accuracy",
        ])?;
        let n = self.rows.len() as f64;
        let avg = |f: fn(&MfDimensionRow) -> f64| -> f64 {
            self.rows.iter().map(f).sum::<f64>() / n
        };
        if !self.rows.is_empty() {
            writer.write_record([
                "avg".to_string(),
                avg(|r| r.precision).to_string(),
                avg(|r| r.recall).to_string(),
                avg(|r| r.f1).to_string(),
                avg(|r| r.accuracy).to_string(),
                avg(|r| r.baseline_f1).to_string(),
                avg(|r| r.baseline_accuracy).to_string(),
            ])?;
        }
        for row in &self.rows {
            writer.write_record([
                row.dimension.clone(),
                row.precision.to_string(),
                row.recall.to_string(),
                row.f1.to_string(),
                row.accuracy.to_string(),
                row.baseline_f1.to_string(),
                row.baseline_accuracy.to_string(),
            ])?;
        }
        writer.flush().map_err(PipelineError::from)?;
        Ok(())
    }
}

fn load_store(config: &ExperimentConfig) -> Result<EmbeddingStore, PipelineError> {
    let path = config
        .embeddings
        .as_ref()
        .ok_or_else(|| PipelineError::MissingInput("an embeddings file (--embeddings)".into()))?;
    let (store, _) = load_embeddings_with(
        path,
        LoadOptions {
            expected_dimension: config.expected_dimension,
            normalize: config.normalize_embeddings,
        },
    )?;
    Ok(store)
}

fn load_lexicon(config: &ExperimentConfig) -> Result<MoralLexicon, PipelineError> {
    match &config.lexicon {
        Some(path) => Ok(parse_lexicon(path)?),
        None => Ok(MoralLexicon::builtin()),
    }
}

fn tokenize_docs(ids: &[String], texts: &[String]) -> Vec<(String, TokenBag)> {
    let bags = crate::scorer::tokenize_corpus(texts);
    ids.iter().cloned().zip(bags).collect()
}

struct AnnotationInputs {
    corpus: AnnotationCorpus,
    dropped_without_features: usize,
    builder_ids: Vec<String>,
}

/// Load annotations and work out which rows participate given the feature
/// mode (rows without external features are dropped in external/combined
/// modes).
fn annotation_inputs(
    config: &ExperimentConfig,
    needs_external: bool,
    external: Option<&FeatureMatrix>,
) -> Result<AnnotationInputs, PipelineError> {
    let path = config
        .annotations
        .as_ref()
        .ok_or_else(|| PipelineError::MissingInput("an annotations file (--annotations)".into()))?;
    let mut corpus = ingest_annotations(path, config.min_votes)?;
    if let Some(map) = &config.aggregate {
        corpus = corpus.aggregate(map)?;
    }
    let all_ids = corpus.ids();
    if !needs_external {
        return Ok(AnnotationInputs {
            corpus,
            dropped_without_features: 0,
            builder_ids: all_ids,
        });
    }
    let matrix = external.expect("external matrix required");
    let matched: Vec<String> = matrix.ids().iter().map(|s| s.to_string()).collect();
    let dropped = all_ids.len() - matched.len();
    let keep: std::collections::BTreeSet<&String> = matched.iter().collect();
    corpus.records.retain(|r| keep.contains(&r.id));
    Ok(AnnotationInputs {
        corpus,
        dropped_without_features: dropped,
        builder_ids: matched,
    })
}

/// Moral-foundation classification: per-dimension repeated-split evaluation
/// against the frequency baseline.
pub fn run_mf_experiment(config: &ExperimentConfig) -> Result<MfExperimentReport, PipelineError> {
    let mode = config.mode();

    // external features align against the raw annotation id order
    let external = match mode {
        FeatureMode::FrameAxis => None,
        _ => {
            let feature_path = config
                .annotation_features
                .as_ref()
                .or(config.features.as_ref())
                .ok_or_else(|| {
                    PipelineError::MissingInput("an external feature file (--features)".into())
                })?;
            let raw = ingest_annotations(
                config.annotations.as_ref().ok_or_else(|| {
                    PipelineError::MissingInput("an annotations file (--annotations)".into())
                })?,
                config.min_votes,
            )?;
            let (matrix, _report) = ingest_external_features(feature_path, &raw.ids())?;
            Some(matrix)
        }
    };

    let inputs = annotation_inputs(config, external.is_some(), external.as_ref())?;
    let labels = inputs.corpus.labels(config.min_votes);

    let store;
    let builder = match mode {
        FeatureMode::FrameAxis => {
            store = load_store(config)?;
            let lexicon = load_lexicon(config)?;
            let axes = build_axis_set(&store, &lexicon)?;
            let docs = tokenize_docs(&inputs.builder_ids, &inputs.corpus.texts());
            FeatureBuilder::frame_axis(docs, axes, &store)
        }
        FeatureMode::External => {
            FeatureBuilder::external(external.clone().expect("external matrix present"))
        }
        FeatureMode::Combined => {
            store = load_store(config)?;
            let lexicon = load_lexicon(config)?;
            let axes = build_axis_set(&store, &lexicon)?;
            let docs = tokenize_docs(&inputs.builder_ids, &inputs.corpus.texts());
            FeatureBuilder::combined(
                docs,
                axes,
                &store,
                external.clone().expect("external matrix present"),
            )?
        }
    };

    let oov_only = builder.build_full()?.oov_only;
    let mut rows = Vec::new();
    for (dimension, column) in &labels {
        let eval = evaluate_repeated(
            &builder,
            column,
            config.train_fraction,
            config.splits,
            config.seed,
            config.classifier,
        )
        .map_err(|e| match e {
            PipelineError::Train(source) => PipelineError::Train(
                crate::classifier::TrainError::Dimension {
                    name: dimension.clone(),
                    source: Box::new(source),
                },
            ),
            other => other,
        })?;
        rows.push(MfDimensionRow {
            dimension: dimension.clone(),
            precision: eval.metrics.precision,
            recall: eval.metrics.recall,
            f1: eval.metrics.f1,
            accuracy: eval.metrics.accuracy,
            baseline_f1: eval.baseline.f1,
            baseline_accuracy: eval.baseline.accuracy,
        });
    }
    Ok(MfExperimentReport {
        mode,
        rows,
        documents_used: inputs.builder_ids.len(),
        documents_dropped_without_features: inputs.dropped_without_features,
        oov_only_documents: oov_only,
    })
}

/// Train one model per annotation dimension on the full annotation corpus.
/// Returns the models plus, in frame-axis or combined mode, the axis set
/// with the annotation-corpus baselines persisted for reuse on held-out
/// text.
pub fn train_mf_models(
    config: &ExperimentConfig,
) -> Result<(BTreeMap<String, LogisticModel>, Option<AxisSet>), PipelineError> {
    let mode = config.mode();
    let external = match mode {
        FeatureMode::FrameAxis => None,
        _ => {
            let feature_path = config
                .annotation_features
                .as_ref()
                .or(config.features.as_ref())
                .ok_or_else(|| {
                    PipelineError::MissingInput("an external feature file (--features)".into())
                })?;
            let raw = ingest_annotations(
                config.annotations.as_ref().ok_or_else(|| {
                    PipelineError::MissingInput("an annotations file (--annotations)".into())
                })?,
                config.min_votes,
            )?;
            let (matrix, _) = ingest_external_features(feature_path, &raw.ids())?;
            Some(matrix)
        }
    };
    let inputs = annotation_inputs(config, external.is_some(), external.as_ref())?;
    let labels = inputs.corpus.labels(config.min_votes);

    let store;
    let builder = match mode {
        FeatureMode::FrameAxis => {
            store = load_store(config)?;
            let lexicon = load_lexicon(config)?;
            let axes = build_axis_set(&store, &lexicon)?;
            let docs = tokenize_docs(&inputs.builder_ids, &inputs.corpus.texts());
            FeatureBuilder::frame_axis(docs, axes, &store)
        }
        FeatureMode::External => {
            FeatureBuilder::external(external.clone().expect("external matrix present"))
        }
        FeatureMode::Combined => {
            store = load_store(config)?;
            let lexicon = load_lexicon(config)?;
            let axes = build_axis_set(&store, &lexicon)?;
            let docs = tokenize_docs(&inputs.builder_ids, &inputs.corpus.texts());
            FeatureBuilder::combined(
                docs,
                axes,
                &store,
                external.clone().expect("external matrix present"),
            )?
        }
    };
    let built = builder.build_full()?;
    let models = train_multilabel(&built.matrix, &labels, config.classifier)?;
    Ok((models, built.axes))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartisanRow {
    pub topic: String,
    pub mode: String,
    pub documents: usize,
    pub f1: f64,
    pub accuracy: f64,
    pub baseline_f1: f64,
    pub baseline_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub topic: String,
    pub intervals: Vec<CoefficientInterval>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartisanshipReport {
    pub rows: Vec<PartisanRow>,
    pub coefficients: Vec<CoefficientReport>,
    /// Modes that could not run, with the reason.
    pub unavailable: Vec<(String, String)>,
}

impl PartisanshipReport {
    pub fn write_metrics_csv<W: io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "topic",
            "mode",
            "documents",
            "f1",
            "accuracy",
            "baseline_f1",
            "baseline_accuracy",
        ])?;
        for row in &self.rows {
            writer.write_record([
                row.topic.clone(),
                row.mode.clone(),
                row.documents.to_string(),
                row.f1.to_string(),
                row.accuracy.to_string(),
                row.baseline_f1.to_string(),
                row.baseline_accuracy.to_string(),
            ])?;
        }
        writer.flush().map_err(PipelineError::from)?;
        Ok(())
    }

    /// Coefficients are for standardized features, one row per (topic,
    /// feature).
    pub fn write_coefficients_csv<W: io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "topic",
            "feature",
            "coefficient",
            "ci_low",
            "ci_high",
            "significant",
        ])?;
        for report in &self.coefficients {
            for c in &report.intervals {
                writer.write_record([
                    report.topic.clone(),
                    c.feature.clone(),
                    c.estimate.to_string(),
                    c.low.to_string(),
                    c.high.to_string(),
                    c.significant.to_string(),
                ])?;
            }
        }
        writer.flush().map_err(PipelineError::from)?;
        Ok(())
    }
}

/// Likelihood features: each trained per-dimension model applied to the raw
/// external feature rows, producing one `<dim>_likelihood` column per model.
pub fn likelihood_features(
    models: &BTreeMap<String, LogisticModel>,
    external: &FeatureMatrix,
) -> Result<FeatureMatrix, PipelineError> {
    let names: Vec<String> = models
        .keys()
        .map(|dim| format!("{dim}_likelihood"))
        .collect();
    let rows = external
        .rows()
        .iter()
        .map(|row| {
            let values = models
                .values()
                .map(|model| predict_proba(model, &row.values))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(FeatureRow {
                id: row.id.clone(),
                values,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(FeatureMatrix::new(names, rows)?)
}

/// Partisanship classification of headlines, per topic and per available
/// feature mode, plus a coefficient report for the frame-axis mode.
pub fn run_partisanship_experiment(
    config: &ExperimentConfig,
) -> Result<PartisanshipReport, PipelineError> {
    let corpus_path = config
        .corpus
        .as_ref()
        .ok_or_else(|| PipelineError::MissingInput("a headline corpus (--corpus)".into()))?;
    let leanings = match &config.leanings {
        Some(path) => SourceLeanings::load(path)?,
        None => SourceLeanings::builtin(),
    };
    let topics: Vec<TopicSpec> = match &config.topics {
        Some(path) => load_topics(path)?,
        None => super::ingest::builtin_topics(),
    };
    let (headlines, _report) = ingest_headlines(corpus_path, &leanings, Some(&topics))?;

    // shared frame-axis inputs (needed by frame_axis and combined modes)
    let frame_inputs = if config.embeddings.is_some() {
        let store = load_store(config)?;
        let lexicon = load_lexicon(config)?;
        let axes = build_axis_set(&store, &lexicon)?;
        Some((store, axes))
    } else {
        None
    };

    // likelihood inputs: headline external features + annotation-trained models
    let headline_features = match &config.features {
        Some(path) => {
            let ids: Vec<String> = headlines.iter().map(|h| h.id.clone()).collect();
            Some(ingest_external_features(path, &ids)?.0)
        }
        None => None,
    };
    let mf_models: Option<BTreeMap<String, LogisticModel>> = if let Some(dir) = &config.models_dir
    {
        Some(super::artifacts::load_artifacts(dir)?.models)
    } else if config.annotations.is_some()
        && (config.annotation_features.is_some() || config.features.is_some())
    {
        // train likelihood models from the annotation corpus in external mode
        let mut mf_config = config.clone();
        mf_config.mode = Some(FeatureMode::External);
        if mf_config.annotation_features.is_none() {
            mf_config.annotation_features = mf_config.features.clone();
        }
        Some(train_mf_models(&mf_config)?.0)
    } else {
        None
    };

    let requested: Vec<FeatureMode> = match config.mode {
        Some(mode) => vec![mode],
        None => vec![
            FeatureMode::External,
            FeatureMode::FrameAxis,
            FeatureMode::Combined,
        ],
    };

    let mut unavailable: Vec<(String, String)> = Vec::new();
    let mut available: Vec<FeatureMode> = Vec::new();
    for mode in requested {
        let reason = match mode {
            FeatureMode::FrameAxis if frame_inputs.is_none() => {
                Some("frame-axis features need --embeddings".to_string())
            }
            FeatureMode::External if headline_features.is_none() => Some(
                "likelihood features need per-headline external vectors (--features)".to_string(),
            ),
            FeatureMode::External if mf_models.is_none() => Some(
                "likelihood features need trained annotation models (--annotations with \
                 features, or models_dir)"
                    .to_string(),
            ),
            FeatureMode::Combined
                if frame_inputs.is_none()
                    || headline_features.is_none()
                    || mf_models.is_none() =>
            {
                Some("combined features need both frame-axis and likelihood inputs".to_string())
            }
            _ => None,
        };
        match reason {
            Some(r) => unavailable.push((mode.to_string(), r)),
            None => available.push(mode),
        }
    }
    if available.is_empty() {
        let (mode, reason) = unavailable
            .first()
            .cloned()
            .unwrap_or(("frame_axis".to_string(), "no inputs".to_string()));
        return Err(PipelineError::ModeUnavailable {
            mode: mode.parse().unwrap_or(FeatureMode::FrameAxis),
            reason,
        });
    }

    let mut topic_names: Vec<String> = Vec::new();
    for h in &headlines {
        if let Some(t) = &h.topic {
            if !topic_names.contains(t) {
                topic_names.push(t.clone());
            }
        }
    }
    if topic_names.is_empty() {
        topic_names.push("all".to_string());
    }

    let mut rows = Vec::new();
    let mut coefficients = Vec::new();
    for topic in &topic_names {
        let topic_rows: Vec<&HeadlineRecord> = headlines
            .iter()
            .filter(|h| h.topic.as_deref() == Some(topic.as_str()) || h.topic.is_none())
            .collect();
        let all_ids: Vec<String> = topic_rows.iter().map(|h| h.id.clone()).collect();
        let all_labels: Vec<u8> = topic_rows.iter().map(|h| h.leaning).collect();
        let texts: Vec<String> = topic_rows.iter().map(|h| h.text.clone()).collect();

        for &mode in &available {
            // likelihood/combined modes can only use headlines that have
            // external vectors
            let (labels, docs, lik_matrix): (
                Vec<u8>,
                Vec<(String, TokenBag)>,
                Option<FeatureMatrix>,
            ) = match mode {
                FeatureMode::FrameAxis => (
                    all_labels.clone(),
                    tokenize_docs(&all_ids, &texts),
                    None,
                ),
                _ => {
                    let features = headline_features.as_ref().expect("checked above");
                    let models = mf_models.as_ref().expect("checked above");
                    let have: std::collections::BTreeSet<&str> =
                        features.ids().into_iter().collect();
                    let keep: Vec<usize> = (0..all_ids.len())
                        .filter(|&i| have.contains(all_ids[i].as_str()))
                        .collect();
                    if keep.len() < 2 {
                        return Err(PipelineError::ModeUnavailable {
                            mode,
                            reason: format!(
                                "topic {topic:?} has {} headlines with external vectors",
                                keep.len()
                            ),
                        });
                    }
                    let ids: Vec<String> = keep.iter().map(|&i| all_ids[i].clone()).collect();
                    let labels: Vec<u8> = keep.iter().map(|&i| all_labels[i]).collect();
                    let kept_texts: Vec<String> =
                        keep.iter().map(|&i| texts[i].clone()).collect();
                    let indices: Vec<usize> = features
                        .ids()
                        .iter()
                        .enumerate()
                        .filter(|(_, id)| ids.iter().any(|x| x == *id))
                        .map(|(i, _)| i)
                        .collect();
                    let subset = features.subset(&indices);
                    let lik = likelihood_features(models, &subset)?;
                    let docs = tokenize_docs(&ids, &kept_texts);
                    (labels, docs, Some(lik))
                }
            };

            let evaluation = match mode {
                FeatureMode::FrameAxis => {
                    let (store, axes) = frame_inputs.as_ref().expect("checked above");
                    let builder = FeatureBuilder::frame_axis(docs, axes.clone(), store);
                    evaluate_repeated(
                        &builder,
                        &labels,
                        config.train_fraction,
                        config.splits,
                        config.seed,
                        config.classifier,
                    )?
                }
                FeatureMode::External => {
                    let builder =
                        FeatureBuilder::external(lik_matrix.expect("built above"));
                    evaluate_repeated(
                        &builder,
                        &labels,
                        config.train_fraction,
                        config.splits,
                        config.seed,
                        config.classifier,
                    )?
                }
                FeatureMode::Combined => {
                    let (store, axes) = frame_inputs.as_ref().expect("checked above");
                    let builder = FeatureBuilder::combined(
                        docs,
                        axes.clone(),
                        store,
                        lik_matrix.expect("built above"),
                    )?;
                    evaluate_repeated(
                        &builder,
                        &labels,
                        config.train_fraction,
                        config.splits,
                        config.seed,
                        config.classifier,
                    )?
                }
            };
            rows.push(PartisanRow {
                topic: topic.clone(),
                mode: mode.to_string(),
                documents: labels.len(),
                f1: evaluation.metrics.f1,
                accuracy: evaluation.metrics.accuracy,
                baseline_f1: evaluation.baseline.f1,
                baseline_accuracy: evaluation.baseline.accuracy,
            });
        }

        // coefficient report: frame-axis model over the whole topic corpus
        if let Some((store, axes)) = frame_inputs.as_ref() {
            let docs = tokenize_docs(&all_ids, &texts);
            let builder = FeatureBuilder::frame_axis(docs, axes.clone(), store);
            let built = builder.build_full()?;
            let model = train_logistic(&built.matrix, &all_labels, config.classifier)?;
            let intervals = coefficient_intervals(&model, &built.matrix, 0.95)?;
            coefficients.push(CoefficientReport {
                topic: topic.clone(),
                intervals,
            });
        }
    }

    Ok(PartisanshipReport {
        rows,
        coefficients,
        unavailable,
    })
}

/// The three correlation matrices: annotation vote counts, in-sample
/// likelihoods on the annotation corpus, and likelihoods on headlines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationReportBundle {
    pub votes: CorrelationMatrix,
    pub corpus_likelihoods: Option<CorrelationMatrix>,
    pub headline_likelihoods: Option<CorrelationMatrix>,
    pub skipped: Vec<(String, String)>,
}

pub fn run_correlation_report(
    config: &ExperimentConfig,
) -> Result<CorrelationReportBundle, PipelineError> {
    let annotations_path = config
        .annotations
        .as_ref()
        .ok_or_else(|| PipelineError::MissingInput("an annotations file (--annotations)".into()))?;
    let mut corpus = ingest_annotations(annotations_path, config.min_votes)?;
    if let Some(map) = &config.aggregate {
        corpus = corpus.aggregate(map)?;
    }
    let votes = correlation_matrix(&corpus.vote_columns())?;

    let mut skipped = Vec::new();
    let mode = config.mode();

    // in-sample likelihoods on the annotation corpus
    let trained = match train_mf_models(config) {
        Ok(result) => Some(result),
        Err(PipelineError::MissingInput(what)) => {
            skipped.push(("corpus_likelihoods".to_string(), format!("missing {what}")));
            None
        }
        Err(other) => return Err(other),
    };

    let mut corpus_likelihoods = None;
    let mut headline_likelihoods = None;
    if let Some((models, axes)) = trained {
        let inputs = match mode {
            FeatureMode::FrameAxis => None,
            _ => {
                let feature_path = config
                    .annotation_features
                    .as_ref()
                    .or(config.features.as_ref())
                    .expect("train_mf_models verified this");
                Some(ingest_external_features(feature_path, &corpus.ids())?.0)
            }
        };
        let matrix = match (&mode, inputs) {
            (FeatureMode::FrameAxis, _) => {
                let store = load_store(config)?;
                let axes = axes.clone().expect("frame mode trains axes");
                let docs = tokenize_docs(&corpus.ids(), &corpus.texts());
                let scores = score_bags(&docs, &axes, &store)?;
                let rows: Vec<FeatureRow> = scores
                    .iter()
                    .map(|s| FeatureRow {
                        id: s.document_id.clone(),
                        values: s.flat(),
                    })
                    .collect();
                FeatureMatrix::new(feature_names(&axes), rows)?
            }
            (_, Some(matrix)) => matrix,
            _ => unreachable!("external modes carry a matrix"),
        };
        let likelihoods = likelihood_features(&models, &matrix)?;
        let columns: Vec<(String, Vec<f64>)> = likelihoods
            .feature_names()
            .iter()
            .enumerate()
            .map(|(j, name)| {
                (
                    name.trim_end_matches("_likelihood").to_string(),
                    likelihoods.rows().iter().map(|r| r.values[j]).collect(),
                )
            })
            .collect();
        corpus_likelihoods = Some(correlation_matrix(&columns)?);

        // likelihoods on the headline corpus, reusing the stored baselines
        if let Some(corpus_path) = &config.corpus {
            let leanings = match &config.leanings {
                Some(path) => SourceLeanings::load(path)?,
                None => SourceLeanings::builtin(),
            };
            let topics = match &config.topics {
                Some(path) => Some(load_topics(path)?),
                None => None,
            };
            let (headlines, _) =
                ingest_headlines(corpus_path, &leanings, topics.as_deref())?;
            let ids: Vec<String> = headlines.iter().map(|h| h.id.clone()).collect();
            let headline_matrix = match mode {
                FeatureMode::FrameAxis => {
                    let store = load_store(config)?;
                    let axes = axes.expect("frame mode trains axes");
                    let texts: Vec<String> =
                        headlines.iter().map(|h| h.text.clone()).collect();
                    let docs = tokenize_docs(&ids, &texts);
                    let scores = score_bags(&docs, &axes, &store)?;
                    let rows: Vec<FeatureRow> = scores
                        .iter()
                        .map(|s| FeatureRow {
                            id: s.document_id.clone(),
                            values: s.flat(),
                        })
                        .collect();
                    FeatureMatrix::new(feature_names(&axes), rows)?
                }
                _ => match &config.features {
                    Some(path) => ingest_external_features(path, &ids)?.0,
                    None => {
                        skipped.push((
                            "headline_likelihoods".to_string(),
                            "missing per-headline external vectors (--features)".to_string(),
                        ));
                        return Ok(CorrelationReportBundle {
                            votes,
                            corpus_likelihoods,
                            headline_likelihoods: None,
                            skipped,
                        });
                    }
                },
            };
            let headline_lik = likelihood_features(&models, &headline_matrix)?;
            let columns: Vec<(String, Vec<f64>)> = headline_lik
                .feature_names()
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    (
                        name.trim_end_matches("_likelihood").to_string(),
                        headline_lik.rows().iter().map(|r| r.values[j]).collect(),
                    )
                })
                .collect();
            headline_likelihoods = Some(correlation_matrix(&columns)?);
        } else {
            skipped.push((
                "headline_likelihoods".to_string(),
                "no headline corpus given (--corpus)".to_string(),
            ));
        }
    }

    Ok(CorrelationReportBundle {
        votes,
        corpus_likelihoods,
        headline_likelihoods,
        skipped,
    })
}

/// Write frame scores for a whole corpus in one call: builds axes, computes
/// baselines on this corpus, scores every document.
pub fn score_corpus_to_csv<W: io::Write>(
    config: &ExperimentConfig,
    ids: &[String],
    texts: &[String],
    out: W,
) -> Result<AxisSet, PipelineError> {
    let store = load_store(config)?;
    let lexicon = load_lexicon(config)?;
    let mut axes = build_axis_set(&store, &lexicon)?;
    let docs = tokenize_docs(ids, texts);
    let bags: Vec<TokenBag> = docs.iter().map(|(_, b)| b.clone()).collect();
    compute_baselines(&bags, &mut axes, &store)?;
    let scores = score_bags(&docs, &axes, &store)?;
    crate::scorer::write_scores_csv(out, &axes, &scores)?;
    Ok(axes)
}

/// Read a generic document corpus: a CSV with a text column and optional id
/// column (headline corpora work too, ignoring leanings).
pub fn read_documents(path: &Path) -> Result<(Vec<String>, Vec<String>), PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(PipelineError::Csv)?;
    let headers = reader.headers()?.clone();
    let text_col = headers
        .iter()
        .position(|h| {
            let h = h.trim().to_lowercase();
            h == "text" || h == "title" || h == "headline"
        })
        .ok_or_else(|| PipelineError::MissingColumn {
            path: path.display().to_string(),
            column: "text/title/headline".to_string(),
        })?;
    let id_col = headers.iter().position(|h| h.trim().to_lowercase() == "id");
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row?;
        let text = row.get(text_col).unwrap_or("").trim().to_string();
        if text.is_empty() {
            continue;
        }
        let id = id_col
            .and_then(|c| row.get(c))
            .map(|s| s.to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("d{row_index}"));
        ids.push(id);
        texts.push(text);
    }
    if ids.is_empty() {
        return Err(PipelineError::NoRowsKept(path.display().to_string()));
    }
    Ok((ids, texts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::planted_partisanship;

    fn planted_builder(
        corpus: &crate::synthetic::PlantedCorpus,
    ) -> (FeatureBuilder<'_>, Vec<u8>) {
        let axes = build_axis_set(&corpus.store, &corpus.lexicon).unwrap();
        let ids: Vec<String> = corpus.documents.iter().map(|(id, _)| id.clone()).collect();
        let texts: Vec<String> = corpus.documents.iter().map(|(_, t)| t.clone()).collect();
        let docs = tokenize_docs(&ids, &texts);
        (
            FeatureBuilder::frame_axis(docs, axes, &corpus.store),
            corpus.labels.clone(),
        )
    }

    #[test]
    fn frame_features_have_two_columns_per_axis() {
        let corpus = planted_partisanship(1, 30);
        let (builder, _) = planted_builder(&corpus);
        let built = builder.build_full().unwrap();
        assert_eq!(built.matrix.arity(), 6); // 3 axes x (bias, intensity)
        assert_eq!(built.matrix.len(), 30);
        assert!(built.axes.unwrap().baselines.is_some());
    }

    #[test]
    fn combined_matrix_is_columnwise_concatenation() {
        let corpus = planted_partisanship(2, 24);
        let axes = build_axis_set(&corpus.store, &corpus.lexicon).unwrap();
        let ids: Vec<String> = corpus.documents.iter().map(|(id, _)| id.clone()).collect();
        let texts: Vec<String> = corpus.documents.iter().map(|(_, t)| t.clone()).collect();
        let docs = tokenize_docs(&ids, &texts);

        let external = FeatureMatrix::new(
            vec!["e1".to_string(), "e2".to_string()],
            ids.iter()
                .enumerate()
                .map(|(i, id)| FeatureRow {
                    id: id.clone(),
                    values: vec![i as f64, -(i as f64)],
                })
                .collect(),
        )
        .unwrap();

        let frame_builder =
            FeatureBuilder::frame_axis(docs.clone(), axes.clone(), &corpus.store);
        let combined_builder =
            FeatureBuilder::combined(docs, axes, &corpus.store, external.clone()).unwrap();
        let train: Vec<usize> = (0..12).collect();
        let frame = frame_builder.build(&train).unwrap();
        let combined = combined_builder.build(&train).unwrap();
        let manual = FeatureMatrix::concat_columns(&frame.matrix, &external).unwrap();
        assert_eq!(combined.matrix, manual);
    }

    #[test]
    fn repeated_evaluation_beats_baseline_on_planted_signal() {
        let corpus = planted_partisanship(3, 120);
        let (builder, labels) = planted_builder(&corpus);
        let eval = evaluate_repeated(&builder, &labels, 0.75, 5, 17, TrainConfig::default())
            .unwrap();
        assert!(eval.metrics.accuracy >= eval.baseline.accuracy + 0.2);
        assert_eq!(eval.metrics.splits, 5);
    }

    #[test]
    fn likelihood_features_are_probabilities() {
        let corpus = planted_partisanship(4, 60);
        let (builder, labels) = planted_builder(&corpus);
        let built = builder.build_full().unwrap();
        let model = train_logistic(&built.matrix, &labels, TrainConfig::default()).unwrap();
        let mut models = BTreeMap::new();
        models.insert("signal".to_string(), model);
        let lik = likelihood_features(&models, &built.matrix).unwrap();
        assert_eq!(lik.feature_names(), &["signal_likelihood"]);
        for row in lik.rows() {
            assert!(row.values[0] > 0.0 && row.values[0] < 1.0);
        }
    }
}
