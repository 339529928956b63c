//! Wald confidence intervals for logistic-regression coefficients.
//!
//! Standard errors come from the inverse of the regularized observed
//! information matrix at the fitted parameters: `X'SX + l2*I` over the
//! standardized feature columns plus an unregularized intercept row/column,
//! where `S = diag(p(1-p))`. The intercept participates in the matrix but no
//! interval is reported for it.

use super::features::FeatureMatrix;
use super::logistic::LogisticModel;
use super::TrainError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientInterval {
    pub feature: String,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub significant: bool,
}

/// Per-weight Wald intervals `w ± z(level) * se(w)`; a coefficient is
/// significant iff its interval excludes zero.
#[allow(clippy::needless_range_loop)]
pub fn coefficient_intervals(
    model: &LogisticModel,
    matrix: &FeatureMatrix,
    level: f64,
) -> Result<Vec<CoefficientInterval>, TrainError> {
    assert!(level > 0.0 && level < 1.0, "level must be in (0, 1)");
    let k = model.weights.len();
    let rows: Vec<Vec<f64>> = matrix
        .rows()
        .iter()
        .map(|r| model.standardizer.transform(&r.values))
        .collect::<Result<_, _>>()?;

    // observed information of the total regularized objective
    let mut info = vec![vec![0.0; k + 1]; k + 1];
    for row in &rows {
        let z: f64 = model
            .weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + model.intercept;
        let p = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        };
        let s = p * (1.0 - p);
        for a in 0..k {
            for b in a..k {
                info[a][b] += s * row[a] * row[b];
            }
            info[a][k] += s * row[a];
        }
        info[k][k] += s;
    }
    for a in 0..k {
        info[a][a] += model.config.l2_strength;
        for b in 0..a {
            info[a][b] = info[b][a];
        }
        info[k][a] = info[a][k];
    }

    let column_name = |j: usize| {
        if j < k {
            model.feature_names[j].clone()
        } else {
            "intercept".to_string()
        }
    };
    let inverse = invert(info).map_err(|j| TrainError::SingularInformation(column_name(j)))?;

    let z_crit = inverse_normal_cdf((1.0 + level) / 2.0);
    let mut intervals = Vec::with_capacity(k);
    for j in 0..k {
        let variance = inverse[j][j];
        if !(variance.is_finite() && variance > 0.0) {
            return Err(TrainError::SingularInformation(column_name(j)));
        }
        let se = variance.sqrt();
        let estimate = model.weights[j];
        let low = estimate - z_crit * se;
        let high = estimate + z_crit * se;
        intervals.push(CoefficientInterval {
            feature: model.feature_names[j].clone(),
            estimate,
            low,
            high,
            significant: low > 0.0 || high < 0.0,
        });
    }
    Ok(intervals)
}

/// Gauss-Jordan inversion with partial pivoting. On failure returns the
/// column index at which no usable pivot remained.
fn invert(mut m: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, usize> {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tolerance = 1e-12 * scale;
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("nonempty range");
        if m[pivot_row][col].abs() <= tolerance {
            return Err(col);
        }
        m.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = m[col][col];
        for j in 0..n {
            m[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = m[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                m[i][j] -= factor * m[col][j];
                inv[i][j] -= factor * inv[col][j];
            }
        }
    }
    Ok(inv)
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability must be in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::super::features::FeatureRow;
    use super::super::logistic::{train_logistic, TrainConfig};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_normal_reference_points() {
        assert!(inverse_normal_cdf(0.5).abs() < 1e-9);
        assert!((inverse_normal_cdf(0.975) - 1.959963984540054).abs() < 1e-7);
        assert!((inverse_normal_cdf(0.025) + 1.959963984540054).abs() < 1e-7);
        assert!((inverse_normal_cdf(0.995) - 2.5758293035489004).abs() < 1e-7);
    }

    #[test]
    fn invert_recovers_known_inverse() {
        let m = vec![vec![4.0, 7.0], vec![2.0, 6.0]];
        let inv = invert(m).unwrap();
        let expected = [[0.6, -0.7], [-0.2, 0.4]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invert_reports_singular_column() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(invert(m).unwrap_err(), 1);
    }

    fn noisy_instance(seed: u64, n: usize, signal: bool) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<FeatureRow> = (0..n)
            .map(|i| FeatureRow {
                id: format!("r{i}"),
                values: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            })
            .collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| {
                let drift = if signal { 3.0 * r.values[0] } else { 0.0 };
                (drift + rng.random_range(-1.0..1.0) > 0.0) as u8
            })
            .collect();
        let m = FeatureMatrix::new(vec!["x".to_string(), "noise".to_string()], rows).unwrap();
        (m, labels)
    }

    // Calibration: a label-independent feature's interval should contain zero
    // about 95% of the time; demand at least 90 of 100 seeded replications.
    #[test]
    fn noise_interval_contains_zero_in_most_replications() {
        let mut containing = 0;
        for seed in 0..100u64 {
            let (m, y) = noisy_instance(1000 + seed, 500, false);
            let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
            let intervals = coefficient_intervals(&model, &m, 0.95).unwrap();
            let noise = intervals.iter().find(|c| c.feature == "noise").unwrap();
            if !noise.significant {
                containing += 1;
            }
        }
        assert!(containing >= 90, "only {containing}/100 intervals contain 0");
    }

    #[test]
    fn separable_signal_is_significant() {
        let (m, y) = noisy_instance(5, 500, true);
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        let intervals = coefficient_intervals(&model, &m, 0.95).unwrap();
        let signal = intervals.iter().find(|c| c.feature == "x").unwrap();
        assert!(signal.significant);
        assert!(signal.low > 0.0);
    }

    #[test]
    fn intervals_are_symmetric_around_the_estimate() {
        let (m, y) = noisy_instance(9, 300, true);
        let model = train_logistic(&m, &y, TrainConfig::default()).unwrap();
        for c in coefficient_intervals(&model, &m, 0.95).unwrap() {
            assert!(((c.low + c.high) / 2.0 - c.estimate).abs() < 1e-12);
        }
    }
}
