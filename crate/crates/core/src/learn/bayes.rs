use serde::{Deserialize, Serialize};

use super::check_training_set;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Smallest smoothing used when `alpha` is given as 0.
pub const ALPHA_FLOOR: f64 = 1e-10;

fn class_log_prior(y: &[bool]) -> [f64; 2] {
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let n = y.len() as f64;
    [((n - pos) / n).ln(), (pos / n).ln()]
}

/// Two-class softmax of joint log likelihoods; returns P(positive).
fn posterior(neg: f64, pos: f64) -> f64 {
    let m = neg.max(pos);
    let (a, b) = ((neg - m).exp(), (pos - m).exp());
    b / (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub class_log_prior: [f64; 2],
    /// `[class][feature]`
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[bool]) -> Result<Self> {
        check_training_set(x, y)?;
        let d = x.n_cols();
        let mut count = [0.0f64; 2];
        let mut sum = [vec![0.0; d], vec![0.0; d]];
        for i in 0..x.n_rows() {
            let c = y[i] as usize;
            count[c] += 1.0;
            x.row(i).for_each(|j, v| sum[c][j] += v);
        }
        let mean = [
            sum[0].iter().map(|s| s / count[0]).collect::<Vec<_>>(),
            sum[1].iter().map(|s| s / count[1]).collect::<Vec<_>>(),
        ];
        let mut sq = [vec![0.0; d], vec![0.0; d]];
        for i in 0..x.n_rows() {
            let c = y[i] as usize;
            let row = x.row(i).to_dense(d);
            for j in 0..d {
                let e = row[j] - mean[c][j];
                sq[c][j] += e * e;
            }
        }
        // Variance floor relative to the widest feature, as in common implementations.
        let n = x.n_rows() as f64;
        let mut sumsq = vec![0.0; d];
        for i in 0..x.n_rows() {
            x.row(i).for_each(|j, v| sumsq[j] += v * v);
        }
        let overall_max = (0..d)
            .map(|j| {
                let mu = (sum[0][j] + sum[1][j]) / n;
                (sumsq[j] / n - mu * mu).max(0.0)
            })
            .fold(0.0f64, f64::max);
        let eps = (1e-9 * overall_max).max(1e-300);
        let var = [
            sq[0].iter().map(|s| s / count[0] + eps).collect(),
            sq[1].iter().map(|s| s / count[1] + eps).collect(),
        ];
        Ok(GaussianNb {
            class_log_prior: class_log_prior(y),
            mean,
            var,
        })
    }

    fn joint(&self, c: usize, row: &[f64]) -> f64 {
        let mut s = self.class_log_prior[c];
        for ((x, m), v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            s -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + 0.5 * (x - m) * (x - m) / v;
        }
        s
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        let d = x.n_cols();
        (0..x.n_rows())
            .map(|i| {
                let row = x.row(i).to_dense(d);
                posterior(self.joint(0, &row), self.joint(1, &row))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `[class][feature]` log P(feature | class)
    pub feature_log_prob: [Vec<f64>; 2],
}

impl MultinomialNb {
    pub fn fit(x: &Matrix, y: &[bool], alpha: f64) -> Result<Self> {
        check_training_set(x, y)?;
        if x.min_value() < 0.0 {
            return Err(Error::Training(
                "multinomial naive Bayes needs non-negative inputs".into(),
            ));
        }
        let alpha = alpha.max(ALPHA_FLOOR);
        let d = x.n_cols();
        let mut counts = [vec![0.0; d], vec![0.0; d]];
        for i in 0..x.n_rows() {
            let c = y[i] as usize;
            x.row(i).for_each(|j, v| counts[c][j] += v);
        }
        let log_prob = |cnt: &Vec<f64>| -> Vec<f64> {
            let total: f64 = cnt.iter().sum::<f64>() + alpha * d as f64;
            cnt.iter().map(|c| ((c + alpha) / total).ln()).collect()
        };
        Ok(MultinomialNb {
            alpha,
            class_log_prior: class_log_prior(y),
            feature_log_prob: [log_prob(&counts[0]), log_prob(&counts[1])],
        })
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        (0..x.n_rows())
            .map(|i| {
                let row = x.row(i);
                let neg = self.class_log_prior[0] + row.dot(&self.feature_log_prob[0]);
                let pos = self.class_log_prior[1] + row.dot(&self.feature_log_prob[1]);
                posterior(neg, pos)
            })
            .collect()
    }
}
