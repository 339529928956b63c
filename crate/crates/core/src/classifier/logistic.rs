//! Full-batch gradient descent for L2-regularized logistic regression.
//!
//! Features are standardized with training statistics before optimization;
//! the statistics travel with the model and are re-applied at inference.
//! The learning rate is halved whenever a step would increase the loss, so
//! the recorded loss sequence is non-increasing. The intercept is not
//! regularized.

use super::features::{FeatureMatrix, Standardizer};
use super::intervals::CoefficientInterval;
use super::TrainError;
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l2_strength: f64,
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_strength: 1.0,
            learning_rate: 0.1,
            max_iterations: 5000,
            tolerance: 1e-6,
        }
    }
}

/// A trained binary model: weights over the standardized kept columns, an
/// unregularized intercept, the standardizer itself, and training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub standardizer: Standardizer,
    pub config: TrainConfig,
    pub iterations_run: usize,
    pub final_loss: f64,
    pub converged: bool,
    pub intervals: Option<Vec<CoefficientInterval>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    #[serde(flatten)]
    model: LogisticModel,
}

impl LogisticModel {
    pub fn to_json(&self) -> String {
        let doc = ModelFile {
            schema_version: SCHEMA_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<LogisticModel, TrainError> {
        let doc: ModelFile = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(TrainError::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: doc.schema_version,
            });
        }
        let m = &doc.model;
        let finite = m.weights.iter().all(|w| w.is_finite())
            && m.intercept.is_finite()
            && m.standardizer.means.iter().all(|v| v.is_finite())
            && m.standardizer.stds.iter().all(|v| v.is_finite() && *v > 0.0);
        if !finite {
            return Err(TrainError::NonFiniteModel);
        }
        Ok(doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TrainError> {
        fs::write(path.as_ref(), self.to_json()).map_err(|source| TrainError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LogisticModel, TrainError> {
        let text = fs::read_to_string(path.as_ref()).map_err(|source| TrainError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        LogisticModel::from_json(&text)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood plus `l2/(2n) * |w|^2`, and its gradient,
/// over already-standardized rows. Exposed so the analytic gradient can be
/// checked against finite differences.
pub fn objective(
    rows: &[Vec<f64>],
    labels: &[u8],
    weights: &[f64],
    intercept: f64,
    l2_strength: f64,
) -> (f64, Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in rows.iter().zip(labels) {
        let y = label as f64;
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
        // ln(1 + e^z) - y z, computed without overflow on either tail
        loss += if z >= 0.0 {
            (1.0 - y) * z + (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p() - y * z
        };
        let residual = sigmoid(z) - y;
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    loss /= n;
    grad_b /= n;
    let mut penalty = 0.0;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2_strength * w / n;
        penalty += w * w;
    }
    loss += l2_strength * penalty / (2.0 * n);
    (loss, grad_w, grad_b)
}

/// Train one binary model. Deterministic: zero initialization, full-batch
/// steps, halving-on-increase learning-rate safeguard, stop when the
/// gradient max-norm drops below the tolerance.
pub fn train_logistic(
    matrix: &FeatureMatrix,
    labels: &[u8],
    config: TrainConfig,
) -> Result<LogisticModel, TrainError> {
    if matrix.len() != labels.len() {
        return Err(TrainError::LengthMismatch {
            rows: matrix.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(TrainError::EmptyLabels);
    }
    let positives = labels.iter().filter(|&&y| y != 0).count();
    if positives == 0 || positives == labels.len() {
        return Err(TrainError::SingleClass);
    }
    if config.l2_strength <= 0.0
        || config.learning_rate <= 0.0
        || config.tolerance <= 0.0
        || config.max_iterations == 0
    {
        return Err(TrainError::InvalidConfig);
    }

    let standardizer = Standardizer::fit(matrix)?;
    let rows: Vec<Vec<f64>> = matrix
        .rows()
        .iter()
        .map(|r| standardizer.transform(&r.values))
        .collect::<Result<_, _>>()?;

    let mut weights = vec![0.0; standardizer.kept.len()];
    let mut intercept = 0.0;
    let mut learning_rate = config.learning_rate;
    let (mut loss, mut grad_w, mut grad_b) =
        objective(&rows, labels, &weights, intercept, config.l2_strength);
    if !loss.is_finite() {
        return Err(TrainError::Divergence);
    }

    let mut iterations_run = 0;
    let mut converged = false;
    for _ in 0..config.max_iterations {
        iterations_run += 1;
        let grad_norm = grad_w
            .iter()
            .fold(grad_b.abs(), |acc, g| acc.max(g.abs()));
        if grad_norm < config.tolerance {
            converged = true;
            break;
        }
        let candidate_w: Vec<f64> = weights
            .iter()
            .zip(&grad_w)
            .map(|(w, g)| w - learning_rate * g)
            .collect();
        let candidate_b = intercept - learning_rate * grad_b;
        let (candidate_loss, candidate_gw, candidate_gb) =
            objective(&rows, labels, &candidate_w, candidate_b, config.l2_strength);
        if !candidate_loss.is_finite() || candidate_loss > loss {
            learning_rate /= 2.0;
            if learning_rate < 1e-300 {
                return Err(TrainError::Divergence);
            }
            continue;
        }
        weights = candidate_w;
        intercept = candidate_b;
        loss = candidate_loss;
        grad_w = candidate_gw;
        grad_b = candidate_gb;
    }

    Ok(LogisticModel {
        feature_names: standardizer.feature_names.clone(),
        weights,
        intercept,
        standardizer,
        config,
        iterations_run,
        final_loss: loss,
        converged,
        intervals: None,
    })
}

/// Probability of the positive class for a raw (pre-standardization) vector.
/// Clamped into the open interval (0, 1).
pub fn predict_proba(model: &LogisticModel, raw: &[f64]) -> Result<f64, TrainError> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(TrainError::NonFiniteFeature("<input>".to_string()));
    }
    let z_row = model.standardizer.transform(raw)?;
    let z: f64 = model
        .weights
        .iter()
        .zip(&z_row)
        .map(|(w, x)| w * x)
        .sum::<f64>()
        + model.intercept;
    Ok(sigmoid(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// Probabilities for every row of a matrix, in row order.
pub fn predict_proba_matrix(
    model: &LogisticModel,
    matrix: &FeatureMatrix,
) -> Result<Vec<f64>, TrainError> {
    matrix
        .rows()
        .iter()
        .map(|r| predict_proba(model, &r.values))
        .collect()
}

/// Hard label: 1 iff the probability reaches the threshold.
pub fn predict_label(model: &LogisticModel, raw: &[f64], threshold: f64) -> Result<u8, TrainError> {
    Ok((predict_proba(model, raw)? >= threshold) as u8)
}

/// Independent one-vs-rest binary models, one per named label column.
/// Training errors are reported with the dimension name attached. Runs the
/// per-dimension trainings on rayon when the `parallel` feature is enabled;
/// each training is internally sequential, so results do not depend on the
/// feature flag.
pub fn train_multilabel(
    matrix: &FeatureMatrix,
    label_columns: &[(String, Vec<u8>)],
    config: TrainConfig,
) -> Result<BTreeMap<String, LogisticModel>, TrainError> {
    let train_one = |(name, labels): &(String, Vec<u8>)| {
        train_logistic(matrix, labels, config)
            .map(|m| (name.clone(), m))
            .map_err(|source| TrainError::Dimension {
                name: name.clone(),
                source: Box::new(source),
            })
    };
    #[cfg(feature = "parallel")]
    let results: Result<Vec<_>, _> = label_columns.par_iter().map(train_one).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<_>, _> = label_columns.iter().map(train_one).collect();
    Ok(results?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::super::features::FeatureRow;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable_1d() -> (FeatureMatrix, Vec<u8>) {
        let rows: Vec<(String, f64, u8)> = (0..20)
            .map(|i| {
                let x = if i < 10 { -2.0 - i as f64 * 0.1 } else { 2.0 + i as f64 * 0.1 };
                (format!("r{i}"), x, (i >= 10) as u8)
            })
            .collect();
        let m = FeatureMatrix::new(
            vec!["x".to_string()],
            rows.iter()
                .map(|(id, x, _)| FeatureRow {
                    id: id.clone(),
                    values: vec![*x],
                })
                .collect(),
        )
        .unwrap();
        let y = rows.iter().map(|(_, _, y)| *y).collect();
        (m, y)
    }

    #[test]
    fn separable_data_reaches_perfect_training_accuracy() {
        let (m, y) = separable_1d();
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        assert!(model.weights[0] > 0.0);
        for (row, &label) in m.rows().iter().zip(&y) {
            assert_eq!(predict_label(&model, &row.values, 0.5).unwrap(), label);
        }
    }

    #[test]
    fn single_class_labels_are_rejected() {
        let (m, _) = separable_1d();
        let err = train_logistic(&m, &[1u8; 20], TrainConfig::default()).unwrap_err();
        assert!(matches!(err, TrainError::SingleClass));
    }

    // Central finite differences on a 10x3 random instance, 20 random
    // parameter points, relative error below 1e-6 including the L2 term.
    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<u8> = (0..10).map(|_| rng.random_range(0..2) as u8).collect();
        let l2 = 0.7;
        let step = 1e-5;
        let rel = |a: f64, b: f64| (a - b).abs() / f64::max(1e-8, a.abs().max(b.abs()));

        for _ in 0..20 {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let b: f64 = rng.random_range(-1.5..1.5);
            let (_, grad_w, grad_b) = objective(&rows, &labels, &w, b, l2);
            for j in 0..3 {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += step;
                wm[j] -= step;
                let fd = (objective(&rows, &labels, &wp, b, l2).0
                    - objective(&rows, &labels, &wm, b, l2).0)
                    / (2.0 * step);
                assert!(
                    rel(grad_w[j], fd) < 1e-6,
                    "weight {j}: analytic {} vs fd {}",
                    grad_w[j],
                    fd
                );
            }
            let fd_b = (objective(&rows, &labels, &w, b + step, l2).0
                - objective(&rows, &labels, &w, b - step, l2).0)
                / (2.0 * step);
            assert!(rel(grad_b, fd_b) < 1e-6);
        }
    }

    #[test]
    fn zero_model_predicts_one_half() {
        let (m, y) = separable_1d();
        let mut model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        model.weights = vec![0.0];
        model.intercept = 0.0;
        for row in m.rows() {
            assert_eq!(predict_proba(&model, &row.values).unwrap(), 0.5);
        }
    }

    // Five hand points of sigmoid(w z + b) with the standardizer forced to
    // the identity transform.
    #[test]
    fn predict_proba_matches_scalar_sigmoid() {
        let standardizer = Standardizer {
            input_arity: 1,
            kept: vec![0],
            feature_names: vec!["x".to_string()],
            means: vec![0.0],
            stds: vec![1.0],
            dropped: vec![],
        };
        let model = LogisticModel {
            feature_names: vec!["x".to_string()],
            weights: vec![0.8],
            intercept: -0.3,
            standardizer,
            config: TrainConfig::default(),
            iterations_run: 0,
            final_loss: 0.0,
            converged: true,
            intervals: None,
        };
        for x in [-2.0f64, -0.5, 0.0, 1.0, 3.5] {
            let expected = 1.0 / (1.0 + (-(0.8 * x - 0.3)).exp());
            let got = predict_proba(&model, &[x]).unwrap();
            assert!((got - expected).abs() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn probability_is_monotone_in_positive_weight_feature() {
        let (m, y) = separable_1d();
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let mut last = 0.0;
        for i in 0..10 {
            let p = predict_proba(&model, &[-3.0 + i as f64]).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn label_threshold_is_inclusive() {
        let (m, y) = separable_1d();
        let mut model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        model.weights = vec![0.0];
        model.intercept = 0.0;
        // probability is exactly 0.5 everywhere
        assert_eq!(predict_label(&model, &[1.0], 0.5).unwrap(), 1);
        model.intercept = -0.1; // probability just below 0.5
        assert_eq!(predict_label(&model, &[1.0], 0.5).unwrap(), 0);
    }

    #[test]
    fn label_agrees_with_probability_on_random_inputs() {
        let (m, y) = separable_1d();
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.random_range(-5.0..5.0)];
            let p = predict_proba(&model, &x).unwrap();
            assert_eq!(
                predict_label(&model, &x, 0.5).unwrap(),
                (p >= 0.5) as u8
            );
        }
    }

    fn random_instance(seed: u64, n: usize) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<FeatureRow> = (0..n)
            .map(|i| FeatureRow {
                id: format!("r{i}"),
                values: (0..3).map(|_| rng.random_range(-2.0..2.0)).collect(),
            })
            .collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| (r.values[0] + 0.5 * r.values[1] + rng.random_range(-0.5..0.5) > 0.0) as u8)
            .collect();
        let m = FeatureMatrix::new(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            rows,
        )
        .unwrap();
        (m, labels)
    }

    #[test]
    fn multilabel_equals_separate_trainings() {
        let (m, y1) = random_instance(11, 60);
        let (_, y2) = random_instance(12, 60);
        let columns = vec![("first".to_string(), y1.clone()), ("second".to_string(), y2.clone())];
        let models = train_multilabel(&m, &columns, TrainConfig::default()).unwrap();
        let solo1 = train_logistic(&m, &y1, TrainConfig::default()).unwrap();
        let solo2 = train_logistic(&m, &y2, TrainConfig::default()).unwrap();
        assert_eq!(models["first"], solo1);
        assert_eq!(models["second"], solo2);
    }

    #[test]
    fn multilabel_error_names_the_dimension() {
        let (m, y1) = random_instance(11, 60);
        let columns = vec![
            ("good".to_string(), y1),
            ("broken".to_string(), vec![1u8; 60]),
        ];
        match train_multilabel(&m, &columns, TrainConfig::default()).unwrap_err() {
            TrainError::Dimension { name, .. } => assert_eq!(name, "broken"),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn row_permutation_barely_moves_weights() {
        let (m, y) = random_instance(21, 80);
        let base = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let mut order: Vec<usize> = (0..80).collect();
        order.reverse();
        order.swap(3, 40);
        let permuted = m.subset(&order);
        let y_permuted: Vec<u8> = order.iter().map(|&i| y[i]).collect();
        let model = train_logistic(&permuted, &y_permuted, TrainConfig::default()).unwrap();
        for (a, b) in base.weights.iter().zip(&model.weights) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((base.intercept - model.intercept).abs() < 1e-9);
    }

    #[test]
    fn loss_is_monotone_under_the_halving_safeguard() {
        let (m, y) = random_instance(31, 50);
        // deliberately oversized learning rate to force halving
        let config = TrainConfig {
            learning_rate: 50.0,
            ..TrainConfig::default()
        };
        let standardizer = Standardizer::fit(&m).unwrap();
        let rows: Vec<Vec<f64>> = m
            .rows()
            .iter()
            .map(|r| standardizer.transform(&r.values).unwrap())
            .collect();
        // re-run the descent loop manually to observe the loss path
        let mut weights = vec![0.0; 3];
        let mut intercept = 0.0;
        let mut lr = config.learning_rate;
        let (mut loss, mut gw, mut gb) = objective(&rows, &y, &weights, intercept, 1.0);
        let mut losses = vec![loss];
        for _ in 0..200 {
            let cw: Vec<f64> = weights.iter().zip(&gw).map(|(w, g)| w - lr * g).collect();
            let cb = intercept - lr * gb;
            let (cl, cgw, cgb) = objective(&rows, &y, &cw, cb, 1.0);
            if !cl.is_finite() || cl > loss {
                lr /= 2.0;
                continue;
            }
            weights = cw;
            intercept = cb;
            loss = cl;
            gw = cgw;
            gb = cgb;
            losses.push(loss);
        }
        for pair in losses.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        // and the real trainer converges on the same data
        let model = train_logistic(&m, &y, config).unwrap();
        assert!(model.final_loss.is_finite());
    }

    #[test]
    fn column_scaling_changes_no_training_decision() {
        let (m, y) = random_instance(41, 70);
        let scaled_rows: Vec<FeatureRow> = m
            .rows()
            .iter()
            .map(|r| FeatureRow {
                id: r.id.clone(),
                values: vec![r.values[0] * 10.0, r.values[1], r.values[2]],
            })
            .collect();
        let scaled = FeatureMatrix::new(m.feature_names().to_vec(), scaled_rows).unwrap();
        let base = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let alt = train_logistic(&scaled, &y, TrainConfig::default()).unwrap();
        for (row, scaled_row) in m.rows().iter().zip(scaled.rows()) {
            assert_eq!(
                predict_label(&base, &row.values, 0.5).unwrap(),
                predict_label(&alt, &scaled_row.values, 0.5).unwrap()
            );
        }
    }

    // The huge penalty caps the stable step size, so the unregularized
    // intercept needs a long budget to creep to logit(base rate).
    #[test]
    fn heavy_regularization_collapses_to_base_rate() {
        let (m, y) = random_instance(51, 100);
        let config = TrainConfig {
            l2_strength: 1e6,
            max_iterations: 150_000,
            ..TrainConfig::default()
        };
        let model = train_logistic(&m, &y, config).unwrap();
        for w in &model.weights {
            assert!(w.abs() < 1e-3, "weight {w} did not shrink");
        }
        let base_rate = y.iter().filter(|&&v| v != 0).count() as f64 / y.len() as f64;
        for row in m.rows() {
            let p = predict_proba(&model, &row.values).unwrap();
            assert!((p - base_rate).abs() < 1e-2);
        }
    }

    #[test]
    fn model_json_round_trip_is_bit_exact() {
        let (m, y) = random_instance(61, 40);
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let reloaded = LogisticModel::from_json(&model.to_json()).unwrap();
        assert_eq!(reloaded, model);
        for row in m.rows() {
            let a = predict_proba(&model, &row.values).unwrap();
            let b = predict_proba(&reloaded, &row.values).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn tampered_weight_fails_to_load() {
        let (m, y) = random_instance(71, 40);
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let json = model.to_json();
        let needle = format!("{}", model.weights[0]);
        let tampered = json.replacen(&needle, "NaN", 1);
        assert!(tampered.contains("NaN"));
        assert!(LogisticModel::from_json(&tampered).is_err());
    }

    #[test]
    fn model_schema_version_mismatch_names_both() {
        let (m, y) = random_instance(81, 40);
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let tampered = model.to_json().replace(
            &format!("\"schema_version\": {SCHEMA_VERSION}"),
            "\"schema_version\": 7",
        );
        match LogisticModel::from_json(&tampered).unwrap_err() {
            TrainError::SchemaVersion { expected, found } => {
                assert_eq!((expected, found), (SCHEMA_VERSION, 7));
            }
            other => panic!("unexpected: {other}"),
        }
    }
}
