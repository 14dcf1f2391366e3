use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frame::FeatureFrame;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit-norm principal axes, one per row, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Principal components via SVD of the centered data; each axis is signed so
/// that its largest-magnitude loading is positive.
pub fn pca(rows: &[Vec<f64>], k: usize) -> Result<Pca> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if n < 2 || d < 1 {
        return Err(Error::invalid("PCA needs at least two rows and one feature"));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("ragged PCA input"));
    }
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let svd = x.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::invalid("SVD did not produce right singular vectors"))?;
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let scale = s.iter().copied().fold(0.0f64, f64::max);
    if scale <= 1e-12 * (1.0 + mean.iter().map(|m| m.abs()).fold(0.0, f64::max)) {
        return Err(Error::invalid("PCA input has rank 0"));
    }
    let total: f64 = s.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    let k = k.min(order.len());
    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let mut axis: Vec<f64> = (0..d).map(|j| vt[(c, j)]).collect();
        let lead = axis
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(axis);
        explained_variance.push(s[c] * s[c] / (n - 1) as f64);
    }
    let explained_variance_ratio = explained_variance.iter().map(|v| v / total).collect();
    Ok(Pca { mean, components, explained_variance, explained_variance_ratio })
}

impl Pca {
    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                self.components
                    .iter()
                    .map(|c| c.iter().zip(r).zip(&self.mean).map(|((a, x), m)| a * (x - m)).sum())
                    .collect()
            })
            .collect()
    }

    pub fn inverse_transform(&self, coords: &[Vec<f64>]) -> Vec<Vec<f64>> {
        coords
            .iter()
            .map(|z| {
                let mut x = self.mean.clone();
                for (zc, c) in z.iter().zip(&self.components) {
                    x.iter_mut().zip(c).for_each(|(xi, ci)| *xi += zc * ci);
                }
                x
            })
            .collect()
    }
}

/// Two-dimensional projection of a frame for scatter plots.
pub fn pca2(frame: &FeatureFrame) -> Result<(Vec<[f64; 2]>, Pca)> {
    if frame.n_cols() < 2 {
        return Err(Error::invalid("PCA projection needs at least two features"));
    }
    let rows = frame.to_rows();
    let model = pca(&rows, 2)?;
    let coords = model
        .transform(&rows)
        .into_iter()
        .map(|z| [z[0], z.get(1).copied().unwrap_or(0.0)])
        .collect();
    Ok((coords, model))
}
