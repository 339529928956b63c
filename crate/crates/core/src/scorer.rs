//! Document tokenization and framing scores.
//!
//! A document's *bias* along an axis is the frequency-weighted mean cosine
//! similarity of its words with the axis; positive values lean toward the
//! virtue pole. Its *intensity* is the frequency-weighted mean squared
//! deviation of those per-word cosines from a corpus baseline bias, which
//! captures how strongly a dimension is engaged even when opposing poles
//! cancel in the bias. Out-of-vocabulary tokens contribute to neither the
//! numerator nor the denominator; a document with no in-vocabulary token at
//! all yields an explicit no-score outcome rather than 0.0.

use crate::axes::{AxisSet, SemanticAxis};
use crate::embedding::{cosine_similarity, EmbeddingStore};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no in-vocabulary token anywhere in the corpus")]
    NoVocabularyOverlap,
    #[error("axis {0:?} has no corpus baseline; compute baselines before intensity scoring")]
    MissingBaseline(String),
    #[error("document {0:?} has no in-vocabulary token")]
    AllTokensOov(String),
    #[error("failed to write scores: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Token multiset of one document. Tokens are kept in sorted order so every
/// floating-point accumulation over the bag is reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBag {
    tokens: BTreeMap<String, u64>,
    total: u64,
}

impl TokenBag {
    pub fn count(&self, token: &str) -> u64 {
        self.tokens.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.tokens.iter().map(|(t, &c)| (t.as_str(), c))
    }

    /// Total count of tokens that have a vector in `store`.
    pub fn in_vocab_total(&self, store: &EmbeddingStore) -> u64 {
        self.iter()
            .filter(|(t, _)| store.contains(t))
            .map(|(_, c)| c)
            .sum()
    }

    /// Frequency-wise union of many bags: one giant document.
    pub fn union<'a>(bags: impl IntoIterator<Item = &'a TokenBag>) -> TokenBag {
        let mut merged = TokenBag::default();
        for bag in bags {
            for (token, count) in &bag.tokens {
                *merged.tokens.entry(token.clone()).or_insert(0) += count;
            }
            merged.total += bag.total;
        }
        merged
    }

    /// Build a bag from explicit (token, count) pairs; zero counts are
    /// dropped, repeated tokens accumulate.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> TokenBag {
        let mut tokens: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0;
        for (token, count) in counts {
            if count == 0 {
                continue;
            }
            *tokens.entry(token).or_insert(0) += count;
            total += count;
        }
        TokenBag { tokens, total }
    }
}

/// Lowercase, split on anything that is not a letter or apostrophe, strip
/// leading and trailing apostrophes, drop empty results.
pub fn tokenize(text: &str) -> TokenBag {
    let mut tokens: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    let lowered = text.to_lowercase();
    for raw in lowered.split(|c: char| !(c.is_alphabetic() || c == '\'')) {
        let token = raw.trim_matches('\'');
        if token.is_empty() {
            continue;
        }
        *tokens.entry(token.to_string()).or_insert(0) += 1;
        total += 1;
    }
    TokenBag { tokens, total }
}

pub fn tokenize_corpus(texts: &[String]) -> Vec<TokenBag> {
    #[cfg(feature = "parallel")]
    {
        texts.par_iter().map(|t| tokenize(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        texts.iter().map(|t| tokenize(t)).collect()
    }
}

fn word_cosine(axis: &SemanticAxis, vector: &[f64]) -> f64 {
    cosine_similarity(&axis.vector, vector)
        .expect("axis and store vectors are nonzero and share a dimension")
}

/// Frequency-weighted mean cosine of the bag's in-vocabulary words with the
/// axis. `None` when no token is in the vocabulary.
pub fn document_bias(bag: &TokenBag, axis: &SemanticAxis, store: &EmbeddingStore) -> Option<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (token, count) in bag.iter() {
        if let Some(vector) = store.lookup(token) {
            weighted += count as f64 * word_cosine(axis, vector);
            weight += count as f64;
        }
    }
    if weight == 0.0 {
        None
    } else {
        Some((weighted / weight).clamp(-1.0, 1.0))
    }
}

/// Baseline framing bias of the whole corpus: the bias of the frequency-wise
/// union of all bags.
pub fn corpus_baseline(
    bags: &[TokenBag],
    axis: &SemanticAxis,
    store: &EmbeddingStore,
) -> Result<f64, ScoreError> {
    if bags.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    let pooled = TokenBag::union(bags);
    document_bias(&pooled, axis, store).ok_or(ScoreError::NoVocabularyOverlap)
}

/// Frequency-weighted mean squared deviation of per-word cosines from
/// `baseline`. `None` when no token is in the vocabulary.
pub fn document_intensity(
    bag: &TokenBag,
    axis: &SemanticAxis,
    baseline: f64,
    store: &EmbeddingStore,
) -> Option<f64> {
    assert!(baseline.is_finite(), "baseline must be finite");
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (token, count) in bag.iter() {
        if let Some(vector) = store.lookup(token) {
            let deviation = word_cosine(axis, vector) - baseline;
            weighted += count as f64 * deviation * deviation;
            weight += count as f64;
        }
    }
    if weight == 0.0 {
        None
    } else {
        Some(weighted / weight)
    }
}

/// Compute the per-axis corpus baselines for `bags` and store them into the
/// axis set. Intensity scoring requires this to have run first.
pub fn compute_baselines(
    bags: &[TokenBag],
    axes: &mut AxisSet,
    store: &EmbeddingStore,
) -> Result<(), ScoreError> {
    let mut baselines = BTreeMap::new();
    for axis in &axes.axes {
        baselines.insert(axis.name.clone(), corpus_baseline(bags, axis, store)?);
    }
    axes.set_baselines(baselines);
    Ok(())
}

/// Per-dimension (bias, intensity) pairs for one document, in axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameScores {
    pub document_id: String,
    pub pairs: Vec<BiasIntensity>,
    /// True when the document had no in-vocabulary token; all pairs are then
    /// (0, 0) placeholders rather than measurements.
    pub oov_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasIntensity {
    pub bias: f64,
    pub intensity: f64,
}

impl FrameScores {
    /// Stacked feature vector: bias then intensity per dimension, axis order.
    pub fn flat(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .flat_map(|p| [p.bias, p.intensity])
            .collect()
    }
}

/// Feature column names for the stacked representation: `<dim>_bias`,
/// `<dim>_intensity` per axis, in axis order.
pub fn feature_names(axes: &AxisSet) -> Vec<String> {
    axes.axes
        .iter()
        .flat_map(|a| [format!("{}_bias", a.name), format!("{}_intensity", a.name)])
        .collect()
}

/// Score one document against every axis. Requires baselines to be present.
pub fn frame_features(
    document_id: &str,
    bag: &TokenBag,
    axes: &AxisSet,
    store: &EmbeddingStore,
) -> Result<FrameScores, ScoreError> {
    let mut pairs = Vec::with_capacity(axes.axes.len());
    for axis in &axes.axes {
        let baseline = axes
            .baseline(&axis.name)
            .ok_or_else(|| ScoreError::MissingBaseline(axis.name.clone()))?;
        let bias = document_bias(bag, axis, store)
            .ok_or_else(|| ScoreError::AllTokensOov(document_id.to_string()))?;
        let intensity = document_intensity(bag, axis, baseline, store)
            .expect("bias succeeded, so at least one token is in vocabulary");
        pairs.push(BiasIntensity { bias, intensity });
    }
    Ok(FrameScores {
        document_id: document_id.to_string(),
        pairs,
        oov_only: false,
    })
}

fn score_one(
    id: &str,
    bag: &TokenBag,
    axes: &AxisSet,
    store: &EmbeddingStore,
) -> Result<FrameScores, ScoreError> {
    match frame_features(id, bag, axes, store) {
        Ok(scores) => Ok(scores),
        Err(ScoreError::AllTokensOov(_)) => Ok(FrameScores {
            document_id: id.to_string(),
            pairs: vec![BiasIntensity { bias: 0.0, intensity: 0.0 }; axes.axes.len()],
            oov_only: true,
        }),
        Err(other) => Err(other),
    }
}

/// Batch scoring. All-OOV documents come back as zero rows with the
/// `oov_only` flag set so feature matrices stay rectangular.
///
/// Runs on rayon when the `parallel` feature is enabled; documents are
/// independent, order is preserved, and the output is identical to
/// [`score_bags_seq`].
pub fn score_bags(
    docs: &[(String, TokenBag)],
    axes: &AxisSet,
    store: &EmbeddingStore,
) -> Result<Vec<FrameScores>, ScoreError> {
    #[cfg(feature = "parallel")]
    {
        docs.par_iter()
            .map(|(id, bag)| score_one(id, bag, axes, store))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        score_bags_seq(docs, axes, store)
    }
}

/// Sequential batch scoring, always available for comparison runs.
pub fn score_bags_seq(
    docs: &[(String, TokenBag)],
    axes: &AxisSet,
    store: &EmbeddingStore,
) -> Result<Vec<FrameScores>, ScoreError> {
    docs.iter()
        .map(|(id, bag)| score_one(id, bag, axes, store))
        .collect()
}

/// CSV batch output: one row per document with `id`, `<dim>_bias` and
/// `<dim>_intensity` per axis, and an `oov_only` flag column.
pub fn write_scores_csv<W: io::Write>(
    out: W,
    axes: &AxisSet,
    scores: &[FrameScores],
) -> Result<(), ScoreError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(feature_names(axes));
    header.push("oov_only".to_string());
    writer.write_record(&header)?;
    for row in scores {
        let mut record = vec![row.document_id.clone()];
        for pair in &row.pairs {
            record.push(pair.bias.to_string());
            record.push(pair.intensity.to_string());
        }
        record.push(row.oov_only.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
