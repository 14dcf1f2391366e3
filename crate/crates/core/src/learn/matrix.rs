use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Csr {
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            let mut sorted = row.clone();
            sorted.sort_by_key(|&(j, _)| j);
            for w in sorted.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::invalid(format!("duplicate column {} in sparse row", w[0].0)));
                }
            }
            for (j, v) in sorted {
                if j >= n_cols {
                    return Err(Error::DimensionMismatch { left: j + 1, right: n_cols });
                }
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Csr { n_cols, indptr, indices, values })
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Matrix {
    Dense { n_cols: usize, data: Vec<f64> },
    Sparse(Csr),
}

#[derive(Debug, Clone, Copy)]
pub enum RowRef<'a> {
    Dense(&'a [f64]),
    Sparse(&'a [usize], &'a [f64]),
}

impl<'a> RowRef<'a> {
    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            RowRef::Dense(x) => x.iter().zip(w).map(|(a, b)| a * b).sum(),
            RowRef::Sparse(idx, val) => idx.iter().zip(*val).map(|(&j, v)| v * w[j]).sum(),
        }
    }

    pub fn dot_row(&self, other: &RowRef) -> f64 {
        match (self, other) {
            (RowRef::Dense(a), RowRef::Dense(b)) => a.iter().zip(*b).map(|(x, y)| x * y).sum(),
            (RowRef::Dense(a), RowRef::Sparse(idx, val)) | (RowRef::Sparse(idx, val), RowRef::Dense(a)) => {
                idx.iter().zip(*val).map(|(&j, v)| v * a[j]).sum()
            }
            (RowRef::Sparse(ia, va), RowRef::Sparse(ib, vb)) => {
                let (mut p, mut q, mut s) = (0, 0, 0.0);
                while p < ia.len() && q < ib.len() {
                    match ia[p].cmp(&ib[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            s += va[p] * vb[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                s
            }
        }
    }

    pub fn get(&self, j: usize) -> f64 {
        match self {
            RowRef::Dense(x) => x[j],
            RowRef::Sparse(idx, val) => idx.binary_search(&j).map_or(0.0, |p| val[p]),
        }
    }

    pub fn squared_norm(&self) -> f64 {
        match self {
            RowRef::Dense(x) => x.iter().map(|v| v * v).sum(),
            RowRef::Sparse(_, val) => val.iter().map(|v| v * v).sum(),
        }
    }

    /// Calls `f(column, value)` for every stored entry.
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            RowRef::Dense(x) => x.iter().enumerate().for_each(|(j, &v)| f(j, v)),
            RowRef::Sparse(idx, val) => idx.iter().zip(*val).for_each(|(&j, &v)| f(j, v)),
        }
    }

    pub fn to_dense(&self, n_cols: usize) -> Vec<f64> {
        match self {
            RowRef::Dense(x) => x.to_vec(),
            RowRef::Sparse(idx, val) => {
                let mut out = vec![0.0; n_cols];
                for (&j, &v) in idx.iter().zip(*val) {
                    out[j] = v;
                }
                out
            }
        }
    }
}

impl Matrix {
    pub fn dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch { left: r.len(), right: n_cols });
        }
        Ok(Matrix::Dense { n_cols, data: rows.concat() })
    }

    pub fn from_flat(n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_cols == 0 || data.len() % n_cols != 0 {
            return Err(Error::invalid(format!(
                "{} values cannot form rows of width {n_cols}",
                data.len()
            )));
        }
        Ok(Matrix::Dense { n_cols, data })
    }

    pub fn n_rows(&self) -> usize {
        match self {
            Matrix::Dense { n_cols, data } => {
                if *n_cols == 0 {
                    0
                } else {
                    data.len() / n_cols
                }
            }
            Matrix::Sparse(c) => c.n_rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Matrix::Dense { n_cols, .. } => *n_cols,
            Matrix::Sparse(c) => c.n_cols,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    pub fn row(&self, i: usize) -> RowRef<'_> {
        match self {
            Matrix::Dense { n_cols, data } => RowRef::Dense(&data[i * n_cols..(i + 1) * n_cols]),
            Matrix::Sparse(c) => {
                let (s, e) = (c.indptr[i], c.indptr[i + 1]);
                RowRef::Sparse(&c.indices[s..e], &c.values[s..e])
            }
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        match self {
            Matrix::Dense { n_cols, .. } => Matrix::Dense {
                n_cols: *n_cols,
                data: rows
                    .iter()
                    .flat_map(|&i| self.row(i).to_dense(*n_cols))
                    .collect(),
            },
            Matrix::Sparse(c) => {
                let mut indptr = vec![0];
                let mut indices = Vec::new();
                let mut values = Vec::new();
                for &i in rows {
                    let (s, e) = (c.indptr[i], c.indptr[i + 1]);
                    indices.extend_from_slice(&c.indices[s..e]);
                    values.extend_from_slice(&c.values[s..e]);
                    indptr.push(indices.len());
                }
                Matrix::Sparse(Csr { n_cols: c.n_cols, indptr, indices, values })
            }
        }
    }

    /// Dense copy keeping only the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i).to_dense(self.n_cols());
            data.extend(cols.iter().map(|&j| row[j]));
        }
        Matrix::Dense { n_cols: cols.len(), data }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Matrix::Dense { data, .. } => data.iter().copied().fold(f64::INFINITY, f64::min),
            Matrix::Sparse(c) => {
                let m = c.values.iter().copied().fold(f64::INFINITY, f64::min);
                if c.values.len() < c.n_rows() * c.n_cols {
                    m.min(0.0)
                } else {
                    m
                }
            }
        }
    }

    /// Variance over every entry, implicit zeros included.
    pub fn variance(&self) -> f64 {
        let n = (self.n_rows() * self.n_cols()) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let (s, s2) = match self {
            Matrix::Dense { data, .. } => data.iter().fold((0.0, 0.0), |(a, b), x| (a + x, b + x * x)),
            Matrix::Sparse(c) => c.values.iter().fold((0.0, 0.0), |(a, b), x| (a + x, b + x * x)),
        };
        let mean = s / n;
        (s2 / n - mean * mean).max(0.0)
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Matrix::Dense { data, .. } => data.iter().all(|x| x.is_finite()),
            Matrix::Sparse(c) => c.values.iter().all(|x| x.is_finite()),
        }
    }
}
