//! Moral-foundation lexicons: named micro-frame dimensions, each with a
//! virtue word set and a vice word set.
//!
//! The on-disk format is a JSON document with a top-level `name` and a list
//! of `dimensions`, each carrying `name`, `virtues`, and `vices` string
//! lists. Words are exact-match unigrams; wildcard stems and multi-word
//! entries are not supported.

use crate::embedding::EmbeddingStore;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("lexicon declares no dimensions")]
    Empty,
    #[error("duplicate dimension name {0:?}")]
    DuplicateDimension(String),
    #[error("dimension {dimension:?} has an empty {pole} word list")]
    EmptyPole {
        dimension: String,
        pole: &'static str,
    },
    #[error("dimension {dimension:?} lists {word:?} as both virtue and vice")]
    Overlap { dimension: String, word: String },
    #[error("dimension {dimension:?} entry {word:?} contains whitespace; only unigrams are allowed")]
    MultiWord { dimension: String, word: String },
}

/// One micro-frame dimension: opposing virtue and vice word sets.
///
/// Words are stored lowercased and sorted; the two sets never overlap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroFrameDef {
    pub name: String,
    pub virtues: BTreeSet<String>,
    pub vices: BTreeSet<String>,
}

/// An ordered, validated set of micro-frame dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoralLexicon {
    pub name: String,
    pub dimensions: Vec<MicroFrameDef>,
}

/// Which lexicon words have vectors in a given embedding store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconCoverage {
    pub dimensions: Vec<DimensionCoverage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionCoverage {
    pub name: String,
    pub virtues: PoleCoverage,
    pub vices: PoleCoverage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleCoverage {
    pub found: usize,
    pub missing: usize,
    pub missing_words: Vec<String>,
}

#[derive(Deserialize)]
struct RawLexicon {
    name: String,
    dimensions: Vec<RawDimension>,
}

#[derive(Deserialize)]
struct RawDimension {
    name: String,
    virtues: Vec<String>,
    vices: Vec<String>,
}

const DEFAULT_LEXICON_JSON: &str = include_str!("../assets/default_lexicon.json");

impl MoralLexicon {
    /// The bundled six-dimension default: care, fairness, ingroup, authority,
    /// purity, morality.
    pub fn builtin() -> MoralLexicon {
        parse_lexicon_str(DEFAULT_LEXICON_JSON).expect("bundled lexicon is valid")
    }

    /// Raw JSON of the bundled default lexicon.
    pub fn builtin_json() -> &'static str {
        DEFAULT_LEXICON_JSON
    }

    pub fn dimension_names(&self) -> Vec<&str> {
        self.dimensions.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&MicroFrameDef> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    /// Canonical JSON form: dimensions in declared order, words sorted.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    /// Per-dimension, per-pole report of which words have vectors in `store`.
    pub fn coverage(&self, store: &EmbeddingStore) -> LexiconCoverage {
        let pole = |words: &BTreeSet<String>| {
            let missing_words: Vec<String> = words
                .iter()
                .filter(|w| !store.contains(w))
                .cloned()
                .collect();
            PoleCoverage {
                found: words.len() - missing_words.len(),
                missing: missing_words.len(),
                missing_words,
            }
        };
        LexiconCoverage {
            dimensions: self
                .dimensions
                .iter()
                .map(|d| DimensionCoverage {
                    name: d.name.clone(),
                    virtues: pole(&d.virtues),
                    vices: pole(&d.vices),
                })
                .collect(),
        }
    }
}

pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<MoralLexicon, LexiconError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon_str(&text)
}

/// Parse and validate a lexicon JSON document. Words are lowercased; repeated
/// words within one pole collapse under set semantics.
pub fn parse_lexicon_str(text: &str) -> Result<MoralLexicon, LexiconError> {
    let raw: RawLexicon = serde_json::from_str(text)?;
    if raw.dimensions.is_empty() {
        return Err(LexiconError::Empty);
    }
    let mut seen_names = BTreeSet::new();
    let mut dimensions = Vec::with_capacity(raw.dimensions.len());
    for dim in raw.dimensions {
        if !seen_names.insert(dim.name.clone()) {
            return Err(LexiconError::DuplicateDimension(dim.name));
        }
        let virtues = normalize_pole(&dim.name, dim.virtues)?;
        let vices = normalize_pole(&dim.name, dim.vices)?;
        if virtues.is_empty() {
            return Err(LexiconError::EmptyPole {
                dimension: dim.name,
                pole: "virtue",
            });
        }
        if vices.is_empty() {
            return Err(LexiconError::EmptyPole {
                dimension: dim.name,
                pole: "vice",
            });
        }
        if let Some(word) = virtues.intersection(&vices).next() {
            return Err(LexiconError::Overlap {
                dimension: dim.name,
                word: word.clone(),
            });
        }
        dimensions.push(MicroFrameDef {
            name: dim.name,
            virtues,
            vices,
        });
    }
    Ok(MoralLexicon {
        name: raw.name,
        dimensions,
    })
}

fn normalize_pole(
    dimension: &str,
    words: Vec<String>,
) -> Result<BTreeSet<String>, LexiconError> {
    let mut set = BTreeSet::new();
    for word in words {
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            continue;
        }
        if word.chars().any(char::is_whitespace) {
            return Err(LexiconError::MultiWord {
                dimension: dimension.to_string(),
                word,
            });
        }
        set.insert(word);
    }
    Ok(set)
}
