//! Moral framing analysis over word embeddings.
//!
//! The crate builds semantic micro-frame axes (virtue words minus vice words
//! in embedding space), scores documents along those axes with framing *bias*
//! (frequency-weighted cosine alignment) and framing *intensity* (weighted
//! squared deviation from a corpus baseline), and feeds the resulting
//! features into from-scratch logistic-regression classifiers for
//! moral-foundation labels and news-source partisanship.
//!
//! Modules:
//! - [`embedding`] — word-vector text files, lookup, cosine similarity
//! - [`lexicon`] — virtue/vice word lists per moral dimension
//! - [`axes`] — axis construction and persistence
//! - [`scorer`] — tokenization, bias/intensity scoring, batch CSV output
//! - [`classifier`] — logistic regression, Wald intervals, frequency baseline
//! - [`eval`] — splits, precision/recall/F1/accuracy, Pearson matrices
//! - [`pipeline`] — corpus ingestion and end-to-end experiments
//! - [`synthetic`] — seeded generators for tests and benchmarks
//!
//! Batch operations (corpus scoring, one-vs-rest training, repeated-split
//! evaluation) run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to sequential iteration otherwise. Both paths
//! produce identical results: parallel maps preserve order and every
//! floating-point reduction is performed sequentially over ordered
//! intermediates.

pub mod axes;
pub mod classifier;
pub mod embedding;
pub mod eval;
pub mod lexicon;
pub mod pipeline;
pub mod scorer;
pub mod synthetic;

pub use axes::{AxisSet, SemanticAxis};
pub use classifier::{BaselineModel, FeatureMatrix, LogisticModel, TrainConfig};
pub use embedding::{EmbeddingStore, LoadReport};
pub use eval::{CorrelationMatrix, MetricsReport, SplitSpec};
pub use lexicon::{LexiconCoverage, MicroFrameDef, MoralLexicon};
pub use scorer::{FrameScores, TokenBag};

/// Version tag written into every persisted JSON artifact and checked on load.
pub const SCHEMA_VERSION: u32 = 1;
