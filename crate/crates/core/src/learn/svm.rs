//! Soft-margin SVM trained by SMO with second-order working-set selection,
//! with Platt-scaled probabilities.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::check_training_set;
use super::config::{Gamma, Kernel, SvmConfig};
use super::matrix::{Matrix, RowRef};
use crate::error::Result;

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelFn {
    pub kernel: Kernel,
    pub gamma: f64,
}

impl KernelFn {
    pub fn resolve(cfg: &SvmConfig, x: &Matrix) -> Self {
        let d = x.n_cols().max(1) as f64;
        let gamma = match cfg.gamma {
            Gamma::Scale => {
                let v = x.variance();
                if v > 0.0 {
                    1.0 / (d * v)
                } else {
                    1.0
                }
            }
            Gamma::Auto => 1.0 / d,
            Gamma::Value(g) => g,
        };
        KernelFn {
            kernel: cfg.kernel,
            gamma,
        }
    }

    pub fn eval(&self, a: &RowRef, b: &RowRef, na: f64, nb: f64) -> f64 {
        let dot = a.dot_row(b);
        match self.kernel {
            Kernel::Linear => dot,
            Kernel::Rbf => (-self.gamma * (na + nb - 2.0 * dot).max(0.0)).exp(),
        }
    }
}

struct KernelCache<'a> {
    x: &'a Matrix,
    norms: Vec<f64>,
    k: KernelFn,
    rows: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a Matrix, k: KernelFn) -> Self {
        let n = x.n_rows();
        let norms = (0..n).map(|i| x.row(i).squared_norm()).collect();
        KernelCache {
            x,
            norms,
            k,
            rows: HashMap::new(),
            order: VecDeque::new(),
            capacity: (CACHE_BYTES / (8 * n.max(1))).max(2),
        }
    }

    fn diag(&self, i: usize) -> f64 {
        let r = self.x.row(i);
        self.k.eval(&r, &r, self.norms[i], self.norms[i])
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if !self.rows.contains_key(&i) {
            if self.rows.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.rows.remove(&old);
                }
            }
            let ri = self.x.row(i);
            let ni = self.norms[i];
            let row: Vec<f64> = (0..self.x.n_rows())
                .map(|t| self.k.eval(&ri, &self.x.row(t), ni, self.norms[t]))
                .collect();
            self.rows.insert(i, row);
            self.order.push_back(i);
        }
        &self.rows[&i]
    }
}

/// Result of the dual solve on a training set.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision is `sum(y_i alpha_i K(x_i, x)) - rho`.
    pub rho: f64,
    /// `sum(alpha) - 0.5 * alpha' Q alpha`, the maximized dual value.
    pub objective: f64,
    pub iterations: usize,
}

/// SMO on `min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0`.
pub fn solve_dual(x: &Matrix, y: &[bool], k: KernelFn, c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = x.n_rows();
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let mut cache = KernelCache::new(x, k);
    let diag: Vec<f64> = (0..n).map(|i| cache.diag(i)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iter = 0;
    while iter < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], ys[t]) && -ys[t] * grad[t] > gmax {
                gmax = -ys[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let qi: Vec<f64> = cache.row(i).to_vec();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], ys[t]) {
                continue;
            }
            let yg = ys[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let b = gmax + yg;
            if b > 0.0 {
                let a = diag[i] + diag[t] - 2.0 * qi[t];
                let a = if a > 0.0 { a } else { TAU };
                let o = -(b * b) / a;
                if o < obj_min {
                    obj_min = o;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX {
            break;
        }
        let qj: Vec<f64> = cache.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (yi, yj) = (ys[i], ys[j]);
        let kij = qi[j];
        if yi != yj {
            let quad = (diag[i] + diag[j] + 2.0 * (yi * yj * kij)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * (yi * yj * kij)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (yi * qi[t] * di + yj * qj[t] * dj);
        }
        iter += 1;
    }

    // Offset from free variables, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    let objective = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    DualSolution {
        alpha,
        rho,
        objective,
        iterations: iter,
    }
}

/// Sigmoid `1 / (1 + exp(a f + b))` fitted by Newton's method with regularized targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    pub fn fit(dec: &[f64], y: &[bool]) -> Platt {
        let prior1 = y.iter().filter(|&&v| v).count() as f64;
        let prior0 = y.len() as f64 - prior1;
        let hi = (prior1 + 1.0) / (prior1 + 2.0);
        let lo = 1.0 / (prior0 + 2.0);
        let t: Vec<f64> = y.iter().map(|&v| if v { hi } else { lo }).collect();
        let (max_iter, min_step, sigma, eps) = (100, 1e-10, 1e-12, 1e-5);
        let mut a = 0.0;
        let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
        let fval_at = |a: f64, b: f64| -> f64 {
            dec.iter()
                .zip(&t)
                .map(|(f, ti)| {
                    let fapb = f * a + b;
                    if fapb >= 0.0 {
                        ti * fapb + (1.0 + (-fapb).exp()).ln()
                    } else {
                        (ti - 1.0) * fapb + (1.0 + fapb.exp()).ln()
                    }
                })
                .sum()
        };
        let mut fval = fval_at(a, b);
        for _ in 0..max_iter {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
            for (f, ti) in dec.iter().zip(&t) {
                let fapb = f * a + b;
                let (p, q) = if fapb >= 0.0 {
                    let e = (-fapb).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = fapb.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = ti - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < eps && g2.abs() < eps {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= min_step {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = fval_at(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if step < min_step {
                break;
            }
        }
        Platt { a, b }
    }

    pub fn proba(&self, f: f64) -> f64 {
        let fapb = f * self.a + self.b;
        if fapb >= 0.0 {
            let e = (-fapb).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + fapb.exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub kernel: KernelFn,
    pub support_vectors: Matrix,
    /// `y_i * alpha_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub rho: f64,
    pub platt: Platt,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl Svm {
    pub fn fit(x: &Matrix, y: &[bool], cfg: &SvmConfig) -> Result<Self> {
        check_training_set(x, y)?;
        let k = KernelFn::resolve(cfg, x);
        let sol = solve_dual(x, y, k, cfg.c, cfg.tol, cfg.max_iter);
        let sv: Vec<usize> = (0..x.n_rows()).filter(|&i| sol.alpha[i] > 0.0).collect();
        let dual_coef = sv
            .iter()
            .map(|&i| if y[i] { sol.alpha[i] } else { -sol.alpha[i] })
            .collect();
        let mut model = Svm {
            kernel: k,
            support_vectors: x.select_rows(&sv),
            dual_coef,
            rho: sol.rho,
            platt: Platt { a: -1.0, b: 0.0 },
            dual_objective: sol.objective,
            iterations: sol.iterations,
        };
        let dec = model.decision(x);
        model.platt = Platt::fit(&dec, y);
        Ok(model)
    }

    pub fn decision(&self, x: &Matrix) -> Vec<f64> {
        let sv_norms: Vec<f64> = (0..self.support_vectors.n_rows())
            .map(|s| self.support_vectors.row(s).squared_norm())
            .collect();
        (0..x.n_rows())
            .map(|i| {
                let r = x.row(i);
                let nr = r.squared_norm();
                self.dual_coef
                    .iter()
                    .enumerate()
                    .map(|(s, c)| c * self.kernel.eval(&self.support_vectors.row(s), &r, sv_norms[s], nr))
                    .sum::<f64>()
                    - self.rho
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        self.decision(x).into_iter().map(|f| self.platt.proba(f)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<bool>) {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.2],
            vec![0.3, 1.0],
            vec![3.0, 3.0],
            vec![2.5, 3.5],
            vec![3.2, 2.1],
        ];
        (Matrix::dense(&rows).unwrap(), vec![false, false, false, true, true, true])
    }

    #[test]
    fn separates_toy_data() {
        let (x, y) = toy();
        for kernel in [Kernel::Linear, Kernel::Rbf] {
            let cfg = SvmConfig { c: 10.0, kernel, ..Default::default() };
            let m = Svm::fit(&x, &y, &cfg).unwrap();
            let dec = m.decision(&x);
            assert!(dec.iter().zip(&y).all(|(d, &t)| (*d > 0.0) == t), "{kernel:?} {dec:?}");
            let p = m.predict_proba(&x);
            assert!(p.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn equality_constraint_holds() {
        let (x, y) = toy();
        let k = KernelFn { kernel: Kernel::Rbf, gamma: 0.5 };
        let sol = solve_dual(&x, &y, k, 1.0, 1e-6, 100_000);
        let s: f64 = sol.alpha.iter().zip(&y).map(|(a, &t)| if t { *a } else { -a }).sum();
        assert!(s.abs() < 1e-12);
        assert!(sol.alpha.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }

    #[test]
    fn platt_is_monotone_in_decision_value() {
        let dec = [-2.0, -1.0, -0.5, 0.4, 1.0, 2.5];
        let y = [false, false, true, false, true, true];
        let p = Platt::fit(&dec, &y);
        assert!(p.a < 0.0);
        assert!(p.proba(2.0) > p.proba(-2.0));
    }
}
