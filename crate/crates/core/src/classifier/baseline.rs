//! Frequency-distribution baseline: predicts each label by sampling the
//! training-set positive rate.

use super::TrainError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub positive_rate: f64,
    pub seed: u64,
}

/// Learn the positive rate from training labels only.
pub fn baseline_train(labels: &[u8], seed: u64) -> Result<BaselineModel, TrainError> {
    if labels.is_empty() {
        return Err(TrainError::EmptyLabels);
    }
    let positives = labels.iter().filter(|&&y| y != 0).count();
    Ok(BaselineModel {
        positive_rate: positives as f64 / labels.len() as f64,
        seed,
    })
}

/// Draw `n` independent labels, each 1 with probability `positive_rate`.
/// Deterministic for a given model seed.
pub fn baseline_predict(model: &BaselineModel, n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    (0..n)
        .map(|_| (rng.random::<f64>() < model.positive_rate) as u8)
        .collect()
}
