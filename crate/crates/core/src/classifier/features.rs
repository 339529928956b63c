//! Feature matrices and train-statistics standardization.

use super::TrainError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One document's raw feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub values: Vec<f64>,
}

/// Named feature columns over identified rows. All rows share the arity of
/// the name list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new(feature_names: Vec<String>, rows: Vec<FeatureRow>) -> Result<Self, TrainError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            assert_eq!(
                row.values.len(),
                feature_names.len(),
                "row {} arity mismatch",
                row.id
            );
            if !seen.insert(row.id.clone()) {
                return Err(TrainError::DuplicateId(row.id.clone()));
            }
        }
        Ok(FeatureMatrix {
            feature_names,
            rows,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.id.as_str()).collect()
    }

    /// Rows at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// CSV form: `id` plus one column per feature. Float formatting
    /// round-trips exactly, so reloading the written file reproduces every
    /// value bit for bit.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.id.clone()];
            record.extend(row.values.iter().map(|v| v.to_string()));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Columnwise concatenation of two matrices with identical row ids in
    /// identical order.
    pub fn concat_columns(left: &FeatureMatrix, right: &FeatureMatrix) -> Result<FeatureMatrix, TrainError> {
        if left.len() != right.len() {
            return Err(TrainError::LengthMismatch {
                rows: left.len(),
                labels: right.len(),
            });
        }
        let mut names = left.feature_names.clone();
        names.extend(right.feature_names.iter().cloned());
        let rows = left
            .rows
            .iter()
            .zip(&right.rows)
            .map(|(a, b)| {
                if a.id != b.id {
                    return Err(TrainError::Misaligned {
                        left: a.id.clone(),
                        right: b.id.clone(),
                    });
                }
                let mut values = a.values.clone();
                values.extend_from_slice(&b.values);
                Ok(FeatureRow {
                    id: a.id.clone(),
                    values,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureMatrix {
            feature_names: names,
            rows,
        })
    }
}

/// Column means and standard deviations learned from training rows, plus the
/// indices of columns kept after dropping zero-variance ones. The same
/// transform is applied verbatim at inference time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub input_arity: usize,
    pub kept: Vec<usize>,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub dropped: Vec<String>,
}

impl Standardizer {
    pub fn fit(matrix: &FeatureMatrix) -> Result<Standardizer, TrainError> {
        let arity = matrix.arity();
        let n = matrix.len() as f64;
        let mut means = vec![0.0; arity];
        for row in matrix.rows() {
            if let Some(col) = row.values.iter().position(|v| !v.is_finite()) {
                return Err(TrainError::NonFiniteFeature(
                    matrix.feature_names()[col].clone(),
                ));
            }
            for (m, v) in means.iter_mut().zip(&row.values) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut variances = vec![0.0; arity];
        for row in matrix.rows() {
            for ((var, v), m) in variances.iter_mut().zip(&row.values).zip(&means) {
                let d = v - m;
                *var += d * d;
            }
        }
        let mut kept = Vec::new();
        let mut kept_names = Vec::new();
        let mut kept_means = Vec::new();
        let mut stds = Vec::new();
        let mut dropped = Vec::new();
        for (j, var) in variances.iter().enumerate() {
            let std = (var / n).sqrt();
            if std > 0.0 {
                kept.push(j);
                kept_names.push(matrix.feature_names()[j].clone());
                kept_means.push(means[j]);
                stds.push(std);
            } else {
                dropped.push(matrix.feature_names()[j].clone());
            }
        }
        if kept.is_empty() {
            return Err(TrainError::NoUsableFeatures);
        }
        Ok(Standardizer {
            input_arity: arity,
            kept,
            feature_names: kept_names,
            means: kept_means,
            stds,
            dropped,
        })
    }

    /// Select kept columns and scale to zero mean / unit variance.
    pub fn transform(&self, raw: &[f64]) -> Result<Vec<f64>, TrainError> {
        if raw.len() != self.input_arity {
            return Err(TrainError::ArityMismatch {
                expected: self.input_arity,
                got: raw.len(),
            });
        }
        Ok(self
            .kept
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&j, (mean, std))| (raw[j] - mean) / std)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(names: &[&str], rows: &[(&str, &[f64])]) -> FeatureMatrix {
        FeatureMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|(id, v)| FeatureRow {
                    id: id.to_string(),
                    values: v.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let m = matrix(&["a", "b"], &[("r1", &[1.0, 10.0]), ("r2", &[3.0, 30.0])]);
        let s = Standardizer::fit(&m).unwrap();
        assert_eq!(s.means, vec![2.0, 20.0]);
        let z = s.transform(&[1.0, 10.0]).unwrap();
        assert!((z[0] + 1.0).abs() < 1e-12);
        assert!((z[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_column_is_dropped_and_reported() {
        let m = matrix(
            &["flat", "x"],
            &[("r1", &[5.0, 1.0]), ("r2", &[5.0, 2.0]), ("r3", &[5.0, 4.0])],
        );
        let s = Standardizer::fit(&m).unwrap();
        assert_eq!(s.dropped, vec!["flat"]);
        assert_eq!(s.feature_names, vec!["x"]);
        assert_eq!(s.transform(&[5.0, 2.0]).unwrap().len(), 1);
    }

    #[test]
    fn all_columns_dropped_is_an_error() {
        let m = matrix(&["flat"], &[("r1", &[5.0]), ("r2", &[5.0])]);
        assert!(matches!(
            Standardizer::fit(&m),
            Err(TrainError::NoUsableFeatures)
        ));
    }

    #[test]
    fn non_finite_feature_is_named() {
        let m = matrix(&["a", "b"], &[("r1", &[1.0, f64::NAN]), ("r2", &[2.0, 3.0])]);
        match Standardizer::fit(&m).unwrap_err() {
            TrainError::NonFiniteFeature(name) => assert_eq!(name, "b"),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = FeatureMatrix::new(
            vec!["a".to_string()],
            vec![
                FeatureRow {
                    id: "x".to_string(),
                    values: vec![1.0],
                },
                FeatureRow {
                    id: "x".to_string(),
                    values: vec![2.0],
                },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, TrainError::DuplicateId(_)));
    }

    #[test]
    fn concat_requires_alignment() {
        let a = matrix(&["a"], &[("r1", &[1.0]), ("r2", &[2.0])]);
        let b = matrix(&["b"], &[("r1", &[3.0]), ("r2", &[4.0])]);
        let joined = FeatureMatrix::concat_columns(&a, &b).unwrap();
        assert_eq!(joined.feature_names(), &["a", "b"]);
        assert_eq!(joined.rows()[1].values, vec![2.0, 4.0]);

        let c = matrix(&["c"], &[("r2", &[3.0]), ("r1", &[4.0])]);
        assert!(matches!(
            FeatureMatrix::concat_columns(&a, &c),
            Err(TrainError::Misaligned { .. })
        ));
    }
}
