//! Seeded generators for synthetic embeddings, lexicons, and corpora.
//!
//! Everything here is deterministic in the seed, which makes the generators
//! usable from tests, benchmarks, and calibration checks without shipping
//! any real dataset.

use crate::embedding::EmbeddingStore;
use crate::lexicon::{MicroFrameDef, MoralLexicon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

// Generated words must survive the tokenizer, which splits on anything that
// is not a letter, so indices are spelled out in base-26 letters.
fn letters(mut index: usize) -> String {
    let mut out = [b'a'; 2].to_vec();
    let mut position = 1;
    loop {
        out[position] = b'a' + (index % 26) as u8;
        index /= 26;
        if index == 0 {
            break;
        }
        if position == 0 {
            out.insert(0, b'a');
        } else {
            position -= 1;
        }
    }
    String::from_utf8(out).expect("ascii")
}

/// Random store with words `waa`, `wab`, … and uniform components in
/// [-1, 1]; vectors are regenerated if they come out degenerate.
pub fn synthetic_store(seed: u64, word_count: usize, dimension: usize) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(word_count);
    for i in 0..word_count {
        let mut vector: Vec<f64>;
        loop {
            vector = (0..dimension).map(|_| rng.random_range(-1.0..1.0)).collect();
            if vector.iter().map(|c| c * c).sum::<f64>().sqrt() > 1e-6 {
                break;
            }
        }
        entries.push((format!("w{}", letters(i)), vector));
    }
    EmbeddingStore::from_entries(dimension, entries)
}

/// Lexicon whose dimensions take disjoint word groups from the store
/// vocabulary: dimension `k` uses words `[2k*p, (2k+1)*p)` as virtues and
/// `[(2k+1)*p, (2k+2)*p)` as vices, with `p = words_per_pole`.
pub fn synthetic_lexicon(
    store: &EmbeddingStore,
    dimensions: usize,
    words_per_pole: usize,
) -> MoralLexicon {
    let words = store.words();
    assert!(
        words.len() >= dimensions * words_per_pole * 2,
        "store too small for the requested lexicon"
    );
    let pole = |start: usize| -> BTreeSet<String> {
        words[start..start + words_per_pole]
            .iter()
            .map(|w| w.to_string())
            .collect()
    };
    MoralLexicon {
        name: "synthetic".to_string(),
        dimensions: (0..dimensions)
            .map(|k| MicroFrameDef {
                name: format!("dim{k}"),
                virtues: pole(2 * k * words_per_pole),
                vices: pole((2 * k + 1) * words_per_pole),
            })
            .collect(),
    }
}

/// Documents of 5–25 tokens sampled uniformly from the store vocabulary,
/// with an out-of-vocabulary marker token mixed into every fourth document.
pub fn synthetic_documents(
    seed: u64,
    store: &EmbeddingStore,
    count: usize,
) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = store.words();
    (0..count)
        .map(|i| {
            let length = rng.random_range(5..=25);
            let mut tokens: Vec<&str> = (0..length)
                .map(|_| words[rng.random_range(0..words.len())])
                .collect();
            if i % 4 == 3 {
                tokens.push("oovmarker");
            }
            (format!("doc{i:03}"), tokens.join(" "))
        })
        .collect()
}

/// A corpus where exactly one lexicon dimension carries the label signal.
pub struct PlantedCorpus {
    pub store: EmbeddingStore,
    pub lexicon: MoralLexicon,
    /// (document id, text) pairs.
    pub documents: Vec<(String, String)>,
    /// 1 for documents drawn from the signal dimension's virtue vocabulary,
    /// 0 for the vice vocabulary.
    pub labels: Vec<u8>,
    pub signal_dimension: String,
    pub noise_dimensions: Vec<String>,
}

/// Build a partisanship-style corpus with one signal axis and two noise
/// axes. Class-1 documents draw mostly from the signal virtue words and
/// class-0 documents from the signal vice words; noise-axis words and filler
/// words are drawn identically for both classes.
pub fn planted_partisanship(seed: u64, document_count: usize) -> PlantedCorpus {
    let dimension = 8;
    let words_per_pole = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    // axis k occupies embedding component k; words jitter around ±2 on it
    let mut pole_words = |prefix: &str, component: usize, sign: f64| -> BTreeSet<String> {
        (0..words_per_pole)
            .map(|i| {
                let word = format!("{prefix}{}", letters(i));
                let mut vector: Vec<f64> =
                    (0..dimension).map(|_| rng.random_range(-0.2..0.2)).collect();
                vector[component] += sign * 2.0;
                entries.push((word.clone(), vector));
                word
            })
            .collect()
    };
    let signal_virtues = pole_words("sv", 0, 1.0);
    let signal_vices = pole_words("sx", 0, -1.0);
    let noise1_virtues = pole_words("nav", 1, 1.0);
    let noise1_vices = pole_words("nax", 1, -1.0);
    let noise2_virtues = pole_words("nbv", 2, 1.0);
    let noise2_vices = pole_words("nbx", 2, -1.0);

    // filler words live in the remaining components only
    let filler: Vec<String> = (0..10)
        .map(|i| {
            let word = format!("f{}", letters(i));
            let mut vector = vec![0.0; dimension];
            for c in vector.iter_mut().skip(3) {
                *c = rng.random_range(-1.0..1.0);
            }
            entries.push((word.clone(), vector));
            word
        })
        .collect();

    let store = EmbeddingStore::from_entries(dimension, entries);
    let lexicon = MoralLexicon {
        name: "planted".to_string(),
        dimensions: vec![
            MicroFrameDef {
                name: "signal".to_string(),
                virtues: signal_virtues.clone(),
                vices: signal_vices.clone(),
            },
            MicroFrameDef {
                name: "noise_a".to_string(),
                virtues: noise1_virtues.clone(),
                vices: noise1_vices.clone(),
            },
            MicroFrameDef {
                name: "noise_b".to_string(),
                virtues: noise2_virtues.clone(),
                vices: noise2_vices.clone(),
            },
        ],
    };

    // the shared pool is label-independent: both noise poles plus filler
    let shared: Vec<&String> = noise1_virtues
        .iter()
        .chain(noise1_vices.iter())
        .chain(noise2_virtues.iter())
        .chain(noise2_vices.iter())
        .chain(filler.iter())
        .collect();
    let signal_pos: Vec<&String> = signal_virtues.iter().collect();
    let signal_neg: Vec<&String> = signal_vices.iter().collect();

    let mut documents = Vec::with_capacity(document_count);
    let mut labels = Vec::with_capacity(document_count);
    for i in 0..document_count {
        let label = (i % 2 == 0) as u8;
        let length = rng.random_range(8..=20);
        let tokens: Vec<&str> = (0..length)
            .map(|_| {
                if rng.random::<f64>() < 0.6 {
                    let pool = if label == 1 { &signal_pos } else { &signal_neg };
                    pool[rng.random_range(0..pool.len())].as_str()
                } else {
                    shared[rng.random_range(0..shared.len())].as_str()
                }
            })
            .collect();
        documents.push((format!("doc{i:04}"), tokens.join(" ")));
        labels.push(label);
    }

    PlantedCorpus {
        store,
        lexicon,
        documents,
        labels,
        signal_dimension: "signal".to_string(),
        noise_dimensions: vec!["noise_a".to_string(), "noise_b".to_string()],
    }
}
