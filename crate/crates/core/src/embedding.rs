//! Loading and querying pretrained word-embedding text files.
//!
//! The expected file layout is the common pretrained-vector format: one entry
//! per line, a token followed by whitespace-separated decimal components.
//! Files that start with a `vocab_size dimension` header line (two integers)
//! are accepted; the header is skipped and not counted in the load report.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embedding file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no well-formed embedding lines in {path}")]
    NoEntries { path: String },
    #[error("first entry has {found} components but {expected} were expected")]
    DimensionConflict { expected: usize, found: usize },
    #[error("cosine similarity of vectors with different lengths ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity of a zero-norm vector")]
    ZeroNorm,
}

/// Counts from one [`load_embeddings`] run.
///
/// Invariant: `lines_read == entries_kept + duplicates_skipped + malformed_skipped`.
/// A detected header line is skipped before counting starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub lines_read: u64,
    pub entries_kept: u64,
    pub duplicates_skipped: u64,
    pub malformed_skipped: u64,
}

/// Immutable word → vector mapping of a fixed dimension.
///
/// Keys are lowercased at load time and queries are lowercased on lookup.
/// Every stored vector has exactly `dimension` finite components and a
/// nonzero norm.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
    source_path: String,
}

impl EmbeddingStore {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    /// Vector for `word`, case-insensitively. Absence is a value, not an error.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        if let Some(v) = self.entries.get(word) {
            return Some(v.as_slice());
        }
        self.entries.get(&word.to_lowercase()).map(|v| v.as_slice())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    /// Words in sorted order (used for deterministic serialization).
    pub fn words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.entries.keys().map(|s| s.as_str()).collect();
        words.sort_unstable();
        words
    }

    /// Build a store directly from (word, vector) pairs. Intended for tests
    /// and synthetic data; applies the same lowercasing and first-wins rules
    /// as the file loader.
    pub fn from_entries(
        dimension: usize,
        pairs: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Self {
        let mut entries = HashMap::new();
        for (word, vector) in pairs {
            assert_eq!(vector.len(), dimension, "vector length mismatch");
            entries.entry(word.to_lowercase()).or_insert(vector);
        }
        EmbeddingStore {
            dimension,
            entries,
            source_path: String::from("<memory>"),
        }
    }

    /// Write the store back out in the text format, one line per word in
    /// sorted order. Float formatting round-trips exactly, so reloading the
    /// written file reproduces every vector bit for bit.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for word in self.words() {
            line.clear();
            line.push_str(word);
            for c in self.entries.get(word).expect("word listed") {
                write!(line, " {}", c).expect("write to string");
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Options for [`load_embeddings_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject the file unless its vectors have exactly this many components.
    pub expected_dimension: Option<usize>,
    /// Scale every vector to unit norm at load time. Off by default: raw
    /// vectors are used as-is, and this switch exists for sensitivity
    /// analysis of axis construction (the mean of vectors is not invariant
    /// to per-word scaling even though cosine is).
    pub normalize: bool,
}

/// Load a whitespace-separated word-vector text file.
///
/// The first well-formed line fixes the dimension unless `expected_dimension`
/// is given. Duplicate words keep the first occurrence; lines with the wrong
/// arity, unparsable or non-finite components, or an all-zero vector are
/// skipped and counted.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    expected_dimension: Option<usize>,
) -> Result<(EmbeddingStore, LoadReport), EmbeddingError> {
    load_embeddings_with(
        path,
        LoadOptions {
            expected_dimension,
            normalize: false,
        },
    )
}

pub fn load_embeddings_with(
    path: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<(EmbeddingStore, LoadReport), EmbeddingError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| EmbeddingError::Io {
        path: display.clone(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut report = LoadReport {
        lines_read: 0,
        entries_kept: 0,
        duplicates_skipped: 0,
        malformed_skipped: 0,
    };
    let mut dimension = options.expected_dimension;
    let mut saw_well_formed = false;
    let mut entries: HashMap<String, Vec<f64>> = HashMap::new();

    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| EmbeddingError::Io {
            path: display.clone(),
            source,
        })?;
        if index == 0 && is_header_line(&line) {
            continue;
        }
        report.lines_read += 1;

        let mut fields = line.split_whitespace();
        let word = match fields.next() {
            Some(w) => w.to_lowercase(),
            None => {
                report.malformed_skipped += 1;
                continue;
            }
        };
        let components: Option<Vec<f64>> = fields
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let components = match components {
            Some(c) if !c.is_empty() => c,
            _ => {
                report.malformed_skipped += 1;
                continue;
            }
        };

        if !saw_well_formed {
            match dimension {
                Some(expected) if components.len() != expected => {
                    return Err(EmbeddingError::DimensionConflict {
                        expected,
                        found: components.len(),
                    });
                }
                Some(_) => {}
                None => dimension = Some(components.len()),
            }
            saw_well_formed = true;
        }
        let dim = dimension.expect("dimension fixed by first well-formed line");
        if components.len() != dim {
            report.malformed_skipped += 1;
            continue;
        }
        if components.iter().all(|&c| c == 0.0) {
            report.malformed_skipped += 1;
            continue;
        }
        if entries.contains_key(&word) {
            report.duplicates_skipped += 1;
            continue;
        }
        let vector = if options.normalize {
            let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
            components.iter().map(|c| c / norm).collect()
        } else {
            components
        };
        entries.insert(word, vector);
        report.entries_kept += 1;
    }

    if entries.is_empty() {
        return Err(EmbeddingError::NoEntries { path: display });
    }
    let store = EmbeddingStore {
        dimension: dimension.expect("nonempty store has a dimension"),
        entries,
        source_path: display,
    };
    Ok((store, report))
}

// A `vocab_size dimension` header: exactly two fields, both bare unsigned
// integers. Only ever tested against the first line of the file.
fn is_header_line(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

/// Cosine similarity `dot(u, v) / (|u| |v|)`, clamped into `[-1, 1]` so that
/// rounding overshoot cannot leak into downstream squared-deviation math.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut norm_u = 0.0;
    let mut norm_v = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        norm_u += a * a;
        norm_v += b * b;
    }
    if norm_u == 0.0 || norm_v == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot / (norm_u.sqrt() * norm_v.sqrt())).clamp(-1.0, 1.0))
}
