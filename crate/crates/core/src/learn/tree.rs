//! CART decision trees and random forests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Criterion, ForestConfig, TreeConfig};
use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    /// Rows with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub split: Option<Split>,
    /// Fraction of positive training samples reaching the node.
    pub value: f64,
    pub n_samples: usize,
    pub impurity: f64,
}

pub fn impurity(criterion: Criterion, n: f64, pos: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let p = pos / n;
    let q = 1.0 - p;
    match criterion {
        Criterion::Gini => 1.0 - p * p - q * q,
        Criterion::Entropy => {
            let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
            h(p) + h(q)
        }
    }
}

/// Distinct feature value with its sample and positive counts.
struct Group {
    value: f64,
    n: usize,
    pos: usize,
}

fn groups_from_sorted(pairs: &[(f64, bool)], out: &mut Vec<Group>) {
    for &(v, y) in pairs {
        match out.last_mut() {
            Some(g) if g.value == v => {
                g.n += 1;
                g.pos += y as usize;
            }
            _ => out.push(Group { value: v, n: 1, pos: y as usize }),
        }
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    child_impurity: f64,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    cfg: &'a TreeConfig,
    max_features: usize,
    min_split: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    total: f64,
}

impl<'a> Builder<'a> {
    fn feature_groups(&self, feature: usize, samples: &[usize], sparse_entries: Option<&[(usize, f64, usize)]>) -> Vec<Group> {
        let mut groups = Vec::new();
        match sparse_entries {
            None => {
                let mut pairs: Vec<(f64, bool)> = samples
                    .iter()
                    .map(|&s| (self.x.row(s).get(feature), self.y[s]))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                groups_from_sorted(&pairs, &mut groups);
            }
            Some(entries) => {
                let mut nz: Vec<(f64, bool)> = entries.iter().map(|&(_, v, s)| (v, self.y[s])).collect();
                nz.sort_by(|a, b| a.0.total_cmp(&b.0));
                let zeros = samples.len() - nz.len();
                let zero_pos = samples.iter().filter(|&&s| self.y[s]).count()
                    - nz.iter().filter(|p| p.1).count();
                let split_at = nz.partition_point(|p| p.0 < 0.0);
                groups_from_sorted(&nz[..split_at], &mut groups);
                if zeros > 0 {
                    groups.push(Group { value: 0.0, n: zeros, pos: zero_pos });
                }
                groups_from_sorted(&nz[split_at..], &mut groups);
            }
        }
        groups
    }

    fn best_in_groups(&self, feature: usize, groups: &[Group], best: &mut Option<Candidate>) {
        let n: usize = groups.iter().map(|g| g.n).sum();
        let pos: usize = groups.iter().map(|g| g.pos).sum();
        let leaf = self.cfg.min_samples_leaf;
        let (mut nl, mut pl) = (0usize, 0usize);
        for k in 0..groups.len() - 1 {
            nl += groups[k].n;
            pl += groups[k].pos;
            let nr = n - nl;
            if nl < leaf || nr < leaf {
                continue;
            }
            let child = (nl as f64 * impurity(self.cfg.criterion, nl as f64, pl as f64)
                + nr as f64 * impurity(self.cfg.criterion, nr as f64, (pos - pl) as f64))
                / n as f64;
            if best.as_ref().map_or(true, |b| child < b.child_impurity) {
                let (a, b) = (groups[k].value, groups[k + 1].value);
                let mut t = a + (b - a) / 2.0;
                if t >= b || t < a {
                    t = a;
                }
                *best = Some(Candidate { feature, threshold: t, child_impurity: child });
            }
        }
    }

    fn find_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<Candidate> {
        let d = self.x.n_cols();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(rng);
        let mut entries: Vec<(usize, f64, usize)> = Vec::new();
        if self.x.is_sparse() {
            for &s in samples {
                self.x.row(s).for_each(|j, v| entries.push((j, v, s)));
            }
            entries.sort_by_key(|e| e.0);
        }
        let mut best = None;
        let mut visited = 0;
        for f in order {
            if visited >= self.max_features {
                break;
            }
            let groups = if self.x.is_sparse() {
                let lo = entries.partition_point(|e| e.0 < f);
                let hi = entries.partition_point(|e| e.0 <= f);
                if lo == hi {
                    continue;
                }
                self.feature_groups(f, samples, Some(&entries[lo..hi]))
            } else {
                self.feature_groups(f, samples, None)
            };
            if groups.len() < 2 {
                continue;
            }
            visited += 1;
            self.best_in_groups(f, &groups, &mut best);
        }
        best
    }

    fn build(&mut self, root_samples: Vec<usize>, rng: &mut ChaCha8Rng) {
        self.total = root_samples.len() as f64;
        let mut stack = vec![(root_samples, 0usize, usize::MAX, false)];
        while let Some((samples, depth, parent, is_left)) = stack.pop() {
            let n = samples.len();
            let pos = samples.iter().filter(|&&s| self.y[s]).count();
            let imp = impurity(self.cfg.criterion, n as f64, pos as f64);
            let id = self.nodes.len();
            self.nodes.push(Node {
                split: None,
                value: if n == 0 { 0.0 } else { pos as f64 / n as f64 },
                n_samples: n,
                impurity: imp,
            });
            if parent != usize::MAX {
                let s = self.nodes[parent].split.as_mut().expect("parent has a split");
                if is_left {
                    s.left = id;
                } else {
                    s.right = id;
                }
            }
            let depth_ok = self.cfg.max_depth.map_or(true, |m| depth < m);
            if !depth_ok || n < self.min_split || n < 2 * self.cfg.min_samples_leaf || imp <= 1e-12 {
                continue;
            }
            let Some(c) = self.find_split(&samples, rng) else {
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&s| self.x.row(s).get(c.feature) <= c.threshold);
            let nl = left.len() as f64;
            let nr = right.len() as f64;
            let pl = left.iter().filter(|&&s| self.y[s]).count() as f64;
            let pr = pos as f64 - pl;
            self.importance[c.feature] += (n as f64 * imp
                - nl * impurity(self.cfg.criterion, nl, pl)
                - nr * impurity(self.cfg.criterion, nr, pr))
                / self.total;
            self.nodes[id].split = Some(Split {
                feature: c.feature,
                threshold: c.threshold,
                left: usize::MAX,
                right: usize::MAX,
            });
            // Right pushed first so the left subtree is numbered first.
            stack.push((right, depth + 1, id, false));
            stack.push((left, depth + 1, id, true));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    /// Normalized mean impurity decrease per feature.
    pub importance: Vec<f64>,
}

impl DecisionTree {
    /// A single-class training set yields a one-leaf tree.
    pub fn fit(x: &Matrix, y: &[bool], cfg: &TreeConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::fit_samples(x, y, (0..x.n_rows()).collect(), cfg, &mut rng)
    }

    pub fn fit_samples(
        x: &Matrix,
        y: &[bool],
        samples: Vec<usize>,
        cfg: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch { left: x.n_rows(), right: y.len() });
        }
        if samples.is_empty() || x.n_cols() == 0 {
            return Err(Error::Training("decision tree needs at least one row and one feature".into()));
        }
        let mut b = Builder {
            x,
            y,
            cfg,
            max_features: cfg.max_features.resolve(x.n_cols()),
            min_split: cfg.min_samples_split.max(2),
            nodes: Vec::new(),
            importance: vec![0.0; x.n_cols()],
            total: 0.0,
        };
        b.build(samples, rng);
        let total: f64 = b.importance.iter().sum();
        if total > 0.0 {
            b.importance.iter_mut().for_each(|v| *v /= total);
        }
        Ok(DecisionTree {
            nodes: b.nodes,
            n_features: x.n_cols(),
            importance: b.importance,
        })
    }

    pub fn leaf_for(&self, x: &Matrix, i: usize) -> usize {
        let row = x.row(i);
        let mut k = 0;
        while let Some(s) = &self.nodes[k].split {
            k = if row.get(s.feature) <= s.threshold { s.left } else { s.right };
        }
        k
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        (0..x.n_rows()).map(|i| self.nodes[self.leaf_for(x, i)].value).collect()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, k: usize) -> usize {
            match &t.nodes[k].split {
                None => 0,
                Some(s) => 1 + go(t, s.left).max(go(t, s.right)),
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub importance: Vec<f64>,
}

impl RandomForest {
    /// Tree `t` draws from a generator seeded with `seed + t`.
    pub fn fit(x: &Matrix, y: &[bool], cfg: &ForestConfig, seed: u64) -> Result<Self> {
        super::check_training_set(x, y)?;
        if cfg.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        let n = x.n_rows();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                let samples = if cfg.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_samples(x, y, samples, &cfg.tree, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut importance = vec![0.0; x.n_cols()];
        for t in &trees {
            for (a, b) in importance.iter_mut().zip(&t.importance) {
                *a += b / trees.len() as f64;
            }
        }
        Ok(RandomForest { trees, importance })
    }

    /// Mean of the trees' leaf probabilities.
    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        let mut out = vec![0.0; x.n_rows()];
        for t in &self.trees {
            for (o, p) in out.iter_mut().zip(t.predict_proba(x)) {
                *o += p;
            }
        }
        let k = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= k);
        out
    }
}
