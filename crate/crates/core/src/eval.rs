//! Train/test splitting, classification metrics, and Pearson correlation
//! matrices.
//!
//! Precision, recall, and F1 are support-weighted two-class averages; with
//! that averaging, weighted recall coincides with plain accuracy, which is
//! the pattern these reports are expected to show.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least two ids to split, got {0}")]
    TooFewIds(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("degenerate split: {train} train / {test} test")]
    DegenerateSplit { train: usize, test: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("failed to write report: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Seeded train/test split specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.75,
            seed: 0,
        }
    }
}

/// Deterministic seeded shuffle; the first `round(fraction * n)` items form
/// the training side. The two sides are disjoint and cover the input.
pub fn split<T: Clone>(ids: &[T], spec: SplitSpec) -> Result<(Vec<T>, Vec<T>), EvalError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(spec.train_fraction));
    }
    if ids.len() < 2 {
        return Err(EvalError::TooFewIds(ids.len()));
    }
    let mut shuffled: Vec<T> = ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    shuffled.shuffle(&mut rng);
    let train_size = (spec.train_fraction * ids.len() as f64).round() as usize;
    if train_size == 0 || train_size >= ids.len() {
        return Err(EvalError::DegenerateSplit {
            train: train_size,
            test: ids.len() - train_size,
        });
    }
    let test = shuffled.split_off(train_size);
    Ok((shuffled, test))
}

/// Binary classification metrics with support-weighted averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub true_negative: u64,
    pub averaging: String,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1_of(precision: f64, recall: f64) -> f64 {
    safe_div(2.0 * precision * recall, precision + recall)
}

/// Confusion counts plus support-weighted precision/recall/F1 and plain
/// accuracy. Nonzero labels are treated as the positive class.
pub fn metrics(predicted: &[u8], truth: &[u8]) -> Result<MetricsReport, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    let mut tn = 0u64;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let total = predicted.len() as f64;
    let support_pos = (tp + fn_) as f64;
    let support_neg = (tn + fp) as f64;

    let prec_pos = safe_div(tp as f64, (tp + fp) as f64);
    let rec_pos = safe_div(tp as f64, (tp + fn_) as f64);
    let prec_neg = safe_div(tn as f64, (tn + fn_) as f64);
    let rec_neg = safe_div(tn as f64, (tn + fp) as f64);

    Ok(MetricsReport {
        precision: (support_pos * prec_pos + support_neg * prec_neg) / total,
        recall: (support_pos * rec_pos + support_neg * rec_neg) / total,
        f1: (support_pos * f1_of(prec_pos, rec_pos) + support_neg * f1_of(prec_neg, rec_neg))
            / total,
        accuracy: (tp + tn) as f64 / total,
        true_positive: tp,
        false_positive: fp,
        false_negative: fn_,
        true_negative: tn,
        averaging: "weighted".to_string(),
    })
}

/// Mean of per-split metrics; confusion counts are summed across splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub splits: usize,
}

pub fn mean_metrics(reports: &[MetricsReport]) -> Result<MeanMetrics, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = reports.len() as f64;
    Ok(MeanMetrics {
        precision: reports.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: reports.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: reports.iter().map(|r| r.f1).sum::<f64>() / n,
        accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / n,
        splits: reports.len(),
    })
}

/// Symmetric Pearson matrix. Cells involving a zero-variance column are
/// explicitly undefined (`None`), never silently zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j]
    }

    /// Matrix CSV with a header row and a leading label column; undefined
    /// cells are written as `NA`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), EvalError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        writer.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.cells) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(|cell| match cell {
                Some(v) => v.to_string(),
                None => "NA".to_string(),
            }));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Pairwise Pearson correlation over named columns of equal length.
pub fn correlation_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix, EvalError> {
    if columns.is_empty() {
        return Err(EvalError::Empty);
    }
    let len = columns[0].1.len();
    if len < 2 {
        return Err(EvalError::TooFewIds(len));
    }
    for (_, col) in columns {
        if col.len() != len {
            return Err(EvalError::LengthMismatch {
                left: len,
                right: col.len(),
            });
        }
    }
    let n = columns.len();
    let means: Vec<f64> = columns
        .iter()
        .map(|(_, col)| col.iter().sum::<f64>() / len as f64)
        .collect();
    let mut cells = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for k in 0..len {
                let dx = columns[i].1[k] - means[i];
                let dy = columns[j].1[k] - means[j];
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
            let cell = if sxx == 0.0 || syy == 0.0 {
                None
            } else if i == j {
                Some(1.0)
            } else {
                Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
            };
            cells[i][j] = cell;
            cells[j][i] = cell;
        }
    }
    Ok(CorrelationMatrix {
        labels: columns.iter().map(|(name, _)| name.clone()).collect(),
        cells,
    })
}
