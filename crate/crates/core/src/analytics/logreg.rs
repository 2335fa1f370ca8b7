//! L2-regularised logistic regression fitted by Newton's method.
//!
//! The objective is `C * sum(log_loss) + |w|^2 / 2` on standardised
//! features, with an unpenalised intercept. `C` is the inverse regularisation
//! strength, so larger values mean weaker regularisation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AnalyticsError, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningModel {
    pub features: Vec<String>,
    /// Weights on the standardised features.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardize: Standardization,
    /// Inverse regularisation strength `C` used for the fit.
    pub reg_strength: f64,
}

impl ScreeningModel {
    /// Share of total absolute weight carried by each feature, in percent.
    pub fn contribution_percent(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().map(|w| w.abs()).sum();
        if total == 0.0 {
            return vec![100.0 / self.weights.len().max(1) as f64; self.weights.len()];
        }
        self.weights.iter().map(|w| 100.0 * w.abs() / total).collect()
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias
            + row
                .iter()
                .zip(&self.weights)
                .zip(self.standardize.mean.iter().zip(&self.standardize.std))
                .map(|((x, w), (m, s))| w * (x - m) / s)
                .sum::<f64>()
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    /// Probabilities for every row of `matrix`, matching columns by name.
    pub fn predict_proba(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>, AnalyticsError> {
        let cols = matrix.columns(&self.features)?;
        Ok(cols
            .values()
            .rows()
            .into_iter()
            .map(|r| self.predict_proba_row(&r.to_vec()))
            .collect())
    }

    /// Weights and intercept on the original feature scale.
    pub fn raw_coefficients(&self) -> (Vec<f64>, f64) {
        let w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.standardize.std)
            .map(|(w, s)| w / s)
            .collect();
        let b = self.bias - w.iter().zip(&self.standardize.mean).map(|(w, m)| w * m).sum::<f64>();
        (w, b)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn train_logreg(
    matrix: &FeatureMatrix,
    reg_strength: f64,
    options: &LogRegOptions,
) -> Result<ScreeningModel, AnalyticsError> {
    if !(reg_strength > 0.0 && reg_strength.is_finite()) {
        return Err(AnalyticsError::InvalidRegStrength(reg_strength));
    }
    for class in [0u8, 1] {
        let count = matrix.class_count(class);
        if count < 2 {
            return Err(AnalyticsError::TooFewPerClass {
                class,
                count,
                needed: 2,
            });
        }
    }
    let n = matrix.num_rows();
    let d = matrix.num_features();
    let mut mean = vec![0.0; d];
    let mut std = vec![1.0; d];
    for j in 0..d {
        let col = matrix.column(j);
        let m = col.sum() / n as f64;
        let s = (col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64).sqrt();
        mean[j] = m;
        std[j] = if s > 0.0 { s } else { 1.0 };
    }
    // design matrix with a leading intercept column
    let x = DMatrix::from_fn(n, d + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            (matrix.values()[[i, j - 1]] - mean[j - 1]) / std[j - 1]
        }
    });
    let y = DVector::from_iterator(n, matrix.labels().iter().map(|&l| l as f64));
    let c = reg_strength;

    let objective = |beta: &DVector<f64>| -> f64 {
        let z = &x * beta;
        let loss: f64 = z.iter().zip(y.iter()).map(|(z, y)| softplus(*z) - y * z).sum();
        let penalty: f64 = beta.iter().skip(1).map(|b| b * b).sum::<f64>() / 2.0;
        c * loss + penalty
    };

    let mut beta = DVector::<f64>::zeros(d + 1);
    let mut current = objective(&beta);
    for _ in 0..options.max_iter {
        let z = &x * &beta;
        let p = z.map(sigmoid);
        let mut grad = x.transpose() * (&p - &y) * c;
        for j in 1..=d {
            grad[j] += beta[j];
        }
        if !grad.iter().all(|g| g.is_finite()) {
            return Err(AnalyticsError::NonFiniteLoss);
        }
        if grad.norm() < options.grad_tol {
            break;
        }
        let w = p.map(|p| c * p * (1.0 - p));
        let mut hess = x.transpose() * DMatrix::from_fn(n, d + 1, |i, j| w[i] * x[(i, j)]);
        hess[(0, 0)] += 1e-12;
        for j in 1..=d {
            hess[(j, j)] += 1.0;
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut t = 1.0;
        let slope = grad.dot(&step);
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &beta - &step * t;
            let value = objective(&candidate);
            if value.is_finite() && value <= current - 1e-4 * t * slope {
                beta = candidate;
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !current.is_finite() {
            return Err(AnalyticsError::NonFiniteLoss);
        }
        if !accepted {
            break;
        }
    }
    if !current.is_finite() {
        return Err(AnalyticsError::NonFiniteLoss);
    }
    Ok(ScreeningModel {
        features: matrix.names().to_vec(),
        weights: beta.iter().skip(1).copied().collect(),
        bias: beta[0],
        standardize: Standardization { mean, std },
        reg_strength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::roc_auc;
    use crate::audio_io::Site;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn matrix(cols: &[Vec<f64>], labels: Vec<u8>) -> FeatureMatrix {
        let n = labels.len();
        let values = Array2::from_shape_fn((n, cols.len()), |(i, j)| cols[j][i]);
        FeatureMatrix::new(
            (0..cols.len()).map(|j| format!("x{j}")).collect(),
            values,
            labels,
            vec![Site::Esuth; n],
            (0..n).map(|i| format!("p{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn separable_one_dimensional() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i < 20)).collect();
        for c in [0.01, 1.0, 100.0] {
            let m = matrix(&[x.clone()], labels.clone());
            let model = train_logreg(&m, c, &LogRegOptions::default()).unwrap();
            assert!(model.weights[0] < 0.0);
            let scores = model.predict_proba(&m).unwrap();
            assert_eq!(roc_auc(&scores, &labels).unwrap().auc, 1.0);
        }
    }

    #[test]
    fn stronger_regularisation_shrinks_noise_weight() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<u8> = (0..500).map(|_| rng.random_range(0..2)).collect();
        let m = matrix(&[x], labels);
        let weak = train_logreg(&m, 10.0, &LogRegOptions::default()).unwrap();
        let strong = train_logreg(&m, 0.001, &LogRegOptions::default()).unwrap();
        assert!(strong.weights[0].abs() < weak.weights[0].abs());
    }

    #[test]
    fn recovers_generating_weights() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let (w1, w2, b) = (1.5, -0.8, 0.3);
        let n = 5000;
        let x1: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let x2: Vec<f64> = (0..n).map(|_| 2.0 * normal.sample(&mut rng) + 1.0).collect();
        let labels: Vec<u8> = (0..n)
            .map(|i| u8::from(rng.random::<f64>() < sigmoid(b + w1 * x1[i] + w2 * x2[i])))
            .collect();
        let model = train_logreg(&matrix(&[x1, x2], labels), 1e4, &LogRegOptions::default()).unwrap();
        let (w, _) = model.raw_coefficients();
        assert!((w[0] - w1).abs() < 0.1 * w1.abs(), "{w:?}");
        assert!((w[1] - w2).abs() < 0.1 * w2.abs(), "{w:?}");
    }

    #[test]
    fn affine_rescaling_keeps_predictions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let z: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels: Vec<u8> = x
            .iter()
            .zip(&z)
            .map(|(a, b)| u8::from(a - 0.5 * b + rng.random_range(-1.0..1.0) > 0.0))
            .collect();
        let a = matrix(&[x.clone(), z.clone()], labels.clone());
        let b = matrix(
            &[x.iter().map(|v| 1000.0 * v - 7.0).collect(), z.iter().map(|v| 0.01 * v + 3.0).collect()],
            labels,
        );
        let pa = train_logreg(&a, 1.0, &LogRegOptions::default()).unwrap().predict_proba(&a).unwrap();
        let pb = train_logreg(&b, 1.0, &LogRegOptions::default()).unwrap().predict_proba(&b).unwrap();
        for (p, q) in pa.iter().zip(&pb) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    #[test]
    fn contributions_sum_to_100() {
        let model = ScreeningModel {
            features: vec!["a".into(), "b".into(), "c".into()],
            weights: vec![1.0, -3.0, 0.0],
            bias: 0.0,
            standardize: Standardization {
                mean: vec![0.0; 3],
                std: vec![1.0; 3],
            },
            reg_strength: 1.0,
        };
        assert_eq!(model.contribution_percent(), vec![25.0, 75.0, 0.0]);
    }

    #[test]
    fn preconditions() {
        let m = matrix(&[vec![1.0, 2.0, 3.0, 4.0]], vec![0, 1, 1, 1]);
        assert_eq!(
            train_logreg(&m, 1.0, &LogRegOptions::default()),
            Err(AnalyticsError::TooFewPerClass { class: 0, count: 1, needed: 2 })
        );
        let m = matrix(&[vec![1.0, 2.0, 3.0, 4.0]], vec![0, 0, 1, 1]);
        assert_eq!(
            train_logreg(&m, 0.0, &LogRegOptions::default()),
            Err(AnalyticsError::InvalidRegStrength(0.0))
        );
    }

    #[test]
    fn json_schema() {
        let m = matrix(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]], vec![0, 0, 1, 0, 1]);
        let model = train_logreg(&m, 1.0, &LogRegOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&model).unwrap();
        for key in ["features", "weights", "bias", "standardize", "reg_strength"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["standardize"].get("mean").is_some() && v["standardize"].get("std").is_some());
        let back: ScreeningModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, model);
    }
}
