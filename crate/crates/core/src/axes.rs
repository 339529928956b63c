//! Semantic axis construction: virtue-mean minus vice-mean in embedding space.

use crate::embedding::EmbeddingStore;
use crate::lexicon::MoralLexicon;
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use thiserror::Error;

/// Axis norms below this are treated as degenerate: cosine against a
/// near-zero vector is numerically meaningless.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AxisError {
    #[error("dimension {0:?}: no virtue word is in the embedding vocabulary")]
    NoVirtueWords(String),
    #[error("dimension {0:?}: no vice word is in the embedding vocabulary")]
    NoViceWords(String),
    #[error("dimension {dimension:?}: degenerate axis (norm {norm:e} below {DEGENERACY_TOLERANCE:e})")]
    DegenerateAxis { dimension: String, norm: f64 },
    #[error("cannot access axis file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("axis file syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("axis file schema version {found} does not match supported version {expected}")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("axis {0:?} contains a non-finite component")]
    NonFinite(String),
}

/// One micro-frame direction plus bookkeeping about how many lexicon words
/// actually contributed (out-of-vocabulary words are dropped from the means).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticAxis {
    pub name: String,
    pub vector: Vec<f64>,
    pub virtue_words_used: usize,
    pub vice_words_used: usize,
}

impl SemanticAxis {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// The per-dimension axes of a lexicon, in lexicon order, with optional
/// per-dimension corpus baseline bias values filled in by the scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSet {
    pub embedding_dimension: usize,
    pub axes: Vec<SemanticAxis>,
    pub baselines: Option<BTreeMap<String, f64>>,
}

impl AxisSet {
    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&SemanticAxis> {
        self.axes.iter().find(|a| a.name == name)
    }

    pub fn baseline(&self, name: &str) -> Option<f64> {
        self.baselines.as_ref().and_then(|b| b.get(name).copied())
    }

    pub fn set_baselines(&mut self, baselines: BTreeMap<String, f64>) {
        self.baselines = Some(baselines);
    }

    pub fn to_json(&self) -> String {
        let doc = AxisFile {
            schema_version: SCHEMA_VERSION,
            set: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("axis set serializes")
    }

    pub fn from_json(text: &str) -> Result<AxisSet, AxisError> {
        let doc: AxisFile = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(AxisError::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: doc.schema_version,
            });
        }
        for axis in &doc.set.axes {
            if axis.vector.iter().any(|c| !c.is_finite()) {
                return Err(AxisError::NonFinite(axis.name.clone()));
            }
        }
        Ok(doc.set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AxisError> {
        fs::write(path.as_ref(), self.to_json()).map_err(|source| AxisError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AxisSet, AxisError> {
        let text = fs::read_to_string(path.as_ref()).map_err(|source| AxisError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        AxisSet::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct AxisFile {
    schema_version: u32,
    #[serde(flatten)]
    set: AxisSet,
}

/// Componentwise mean of the in-vocabulary word vectors. Words are visited
/// in sorted order so the floating-point sum is reproducible.
fn pole_mean(store: &EmbeddingStore, words: &BTreeSet<String>) -> Option<(Vec<f64>, usize)> {
    let mut sum = vec![0.0; store.dimension()];
    let mut used = 0usize;
    for word in words {
        if let Some(vector) = store.lookup(word) {
            for (s, c) in sum.iter_mut().zip(vector) {
                *s += c;
            }
            used += 1;
        }
    }
    if used == 0 {
        return None;
    }
    let n = used as f64;
    for s in &mut sum {
        *s /= n;
    }
    Some((sum, used))
}

/// Build one axis: mean of found virtue vectors minus mean of found vice
/// vectors. Out-of-vocabulary words are silently excluded; the used-counts
/// reflect the words that actually contributed.
pub fn build_axis(
    store: &EmbeddingStore,
    name: &str,
    virtues: &BTreeSet<String>,
    vices: &BTreeSet<String>,
) -> Result<SemanticAxis, AxisError> {
    let (virtue_mean, virtue_words_used) =
        pole_mean(store, virtues).ok_or_else(|| AxisError::NoVirtueWords(name.to_string()))?;
    let (vice_mean, vice_words_used) =
        pole_mean(store, vices).ok_or_else(|| AxisError::NoViceWords(name.to_string()))?;
    let vector: Vec<f64> = virtue_mean
        .iter()
        .zip(&vice_mean)
        .map(|(a, b)| a - b)
        .collect();
    let axis = SemanticAxis {
        name: name.to_string(),
        vector,
        virtue_words_used,
        vice_words_used,
    };
    let norm = axis.norm();
    if norm < DEGENERACY_TOLERANCE {
        return Err(AxisError::DegenerateAxis {
            dimension: name.to_string(),
            norm,
        });
    }
    Ok(axis)
}

/// One axis per lexicon dimension, in lexicon order. Baselines are left
/// unset; the scorer fills them from a corpus.
pub fn build_axis_set(
    store: &EmbeddingStore,
    lexicon: &MoralLexicon,
) -> Result<AxisSet, AxisError> {
    let axes = lexicon
        .dimensions
        .iter()
        .map(|dim| build_axis(store, &dim.name, &dim.virtues, &dim.vices))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AxisSet {
        embedding_dimension: store.dimension(),
        axes,
        baselines: None,
    })
}
