use serde::{Deserialize, Serialize};

use super::config::LrConfig;
use super::matrix::Matrix;
use super::{check_training_set, sigmoid};
use crate::error::Result;

/// L2-regularized logistic regression; the bias is not penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `|w|^2 / (2 C n)`, the per-sample form of
/// `0.5 |w|^2 + C * sum(loss)`.
pub fn objective(x: &Matrix, y: &[bool], w: &[f64], b: f64, c: f64) -> f64 {
    let n = y.len() as f64;
    let loss: f64 = (0..x.n_rows())
        .map(|i| {
            let z = x.row(i).dot(w) + b;
            if y[i] {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    loss / n + w.iter().map(|v| v * v).sum::<f64>() / (2.0 * c * n)
}

pub fn gradient(x: &Matrix, y: &[bool], w: &[f64], b: f64, c: f64) -> (Vec<f64>, f64) {
    let n = y.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|v| v / (c * n)).collect();
    let mut gb = 0.0;
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let r = (sigmoid(row.dot(w) + b) - if y[i] { 1.0 } else { 0.0 }) / n;
        row.for_each(|j, v| gw[j] += r * v);
        gb += r;
    }
    (gw, gb)
}

impl LogisticRegression {
    pub fn zeros(n_features: usize) -> Self {
        LogisticRegression {
            weights: vec![0.0; n_features],
            bias: 0.0,
            iterations: 0,
            converged: false,
        }
    }

    /// Full-batch gradient descent with Armijo backtracking.
    pub fn fit(x: &Matrix, y: &[bool], cfg: &LrConfig) -> Result<Self> {
        check_training_set(x, y)?;
        let d = x.n_cols();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut f = objective(x, y, &w, b, cfg.c);
        let mut step = 1.0;
        let mut converged = false;
        let mut it = 0;
        while it < cfg.max_iter {
            let (gw, gb) = gradient(x, y, &w, b, cfg.c);
            let gnorm_inf = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
            if gnorm_inf < cfg.tol {
                converged = true;
                break;
            }
            let g2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
            step *= 2.0;
            loop {
                let nw: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
                let nb = b - step * gb;
                let nf = objective(x, y, &nw, nb, cfg.c);
                if nf <= f - 1e-4 * step * g2 {
                    w = nw;
                    b = nb;
                    f = nf;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            it += 1;
            if step < 1e-20 {
                break;
            }
        }
        Ok(LogisticRegression {
            weights: w,
            bias: b,
            iterations: it,
            converged,
        })
    }

    pub fn decision(&self, x: &Matrix) -> Vec<f64> {
        (0..x.n_rows())
            .map(|i| x.row(i).dot(&self.weights) + self.bias)
            .collect()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        self.decision(x).into_iter().map(sigmoid).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_gives_half() {
        let m = LogisticRegression::zeros(2);
        let x = Matrix::dense(&[vec![3.0, -1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(m.predict_proba(&x), vec![0.5, 0.5]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = Matrix::dense(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.3, -2.0]]).unwrap();
        let y = [true, false, true];
        let w = [0.2, -0.4];
        let b = 0.1;
        let (gw, gb) = gradient(&x, &y, &w, b, 2.0);
        let h = 1e-6;
        for j in 0..2 {
            let mut wp = w;
            let mut wm = w;
            wp[j] += h;
            wm[j] -= h;
            let fd = (objective(&x, &y, &wp, b, 2.0) - objective(&x, &y, &wm, b, 2.0)) / (2.0 * h);
            assert!((fd - gw[j]).abs() < 1e-8);
        }
        let fd = (objective(&x, &y, &w, b + h, 2.0) - objective(&x, &y, &w, b - h, 2.0)) / (2.0 * h);
        assert!((fd - gb).abs() < 1e-8);
    }

    #[test]
    fn fits_monotone_one_dimensional_data() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 4.0 - 2.5]).collect();
        let y: Vec<bool> = (0..20).map(|i| i >= 10 || i == 7).collect();
        let x = Matrix::dense(&xs).unwrap();
        let m = LogisticRegression::fit(&x, &y, &LrConfig::default()).unwrap();
        assert!(m.converged);
        assert!(m.weights[0] > 0.0);
        let p = m.predict_proba(&x);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::dense(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(LogisticRegression::fit(&x, &[true, true], &LrConfig::default()).is_err());
    }
}
