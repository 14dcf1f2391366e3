//! Exhaustive hyperparameter search scored by validation F1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ModelConfig, ModelKind};
use super::matrix::Matrix;
use super::{threshold, Learner};
use crate::error::{Error, Result};
use crate::evaluate::score_bool;

/// Ordered parameter axes; the first axis varies slowest.
///
/// Axis names are config field paths such as `c`, `kernel` or `tree.max_depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub kind: ModelKind,
    pub axes: Vec<(String, Vec<Value>)>,
}

impl ParamGrid {
    pub fn new(kind: ModelKind) -> Self {
        ParamGrid { kind, axes: Vec::new() }
    }

    pub fn axis(mut self, name: &str, values: Vec<Value>) -> Self {
        self.axes.push((name.to_string(), values));
        self
    }

    /// The published search grids for LR, NB, SVM and DT.
    pub fn default_for(kind: ModelKind) -> Result<Self> {
        let g = ParamGrid::new(kind);
        Ok(match kind {
            ModelKind::Lr => g.axis("c", vec![json!(0.1), json!(0.5), json!(1.0), json!(5.0), json!(10.0), json!(50.0), json!(100.0), json!(200.0), json!(500.0), json!(1000.0)]),
            ModelKind::Nb => g.axis("alpha", (0..=10).map(|i| json!(i as f64 / 10.0)).collect()),
            ModelKind::Svm => g
                .axis("c", vec![json!(0.01), json!(0.1), json!(1.0), json!(10.0), json!(100.0)])
                .axis("kernel", vec![json!("linear"), json!("rbf")])
                .axis("gamma", vec![json!("scale"), json!("auto")]),
            ModelKind::Dt => g
                .axis("criterion", vec![json!("gini"), json!("entropy")])
                .axis("max_depth", vec![Value::Null, json!(1), json!(5), json!(10), json!(20), json!(50), json!(90), json!(100), json!(150)])
                .axis("max_features", vec![json!("none"), json!("sqrt"), json!("auto"), json!("log2")])
                .axis("min_samples_split", vec![json!(1), json!(2), json!(5), json!(10), json!(20), json!(40)])
                .axis("min_samples_leaf", vec![json!(1), json!(2), json!(5), json!(10), json!(20)]),
            other => {
                return Err(Error::invalid(format!("no default search grid for {other}")));
            }
        })
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// Cartesian product of the axes applied over `base`.
    pub fn candidates(&self, base: &ModelConfig) -> Result<Vec<ModelConfig>> {
        if base.kind() != self.kind {
            return Err(Error::invalid(format!(
                "grid for {} applied to a {} config",
                self.kind,
                base.kind()
            )));
        }
        if self.axes.is_empty() || self.axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::invalid("search grid is empty"));
        }
        let base = serde_json::to_value(base)?;
        let mut out = Vec::with_capacity(self.size());
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            let mut v = base.clone();
            for ((name, values), &k) in self.axes.iter().zip(&idx) {
                let mut slot = &mut v["params"];
                for part in name.split('.') {
                    slot = slot
                        .get_mut(part)
                        .ok_or_else(|| Error::invalid(format!("unknown hyperparameter {name:?}")))?;
                }
                *slot = values[k].clone();
            }
            let cfg: ModelConfig = serde_json::from_value(v)
                .map_err(|e| Error::invalid(format!("bad grid value: {e}")))?;
            cfg.validate()?;
            out.push(cfg);
            let mut a = self.axes.len();
            loop {
                if a == 0 {
                    return Ok(out);
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < self.axes[a].1.len() {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub config: ModelConfig,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub best: usize,
}

impl GridResult {
    pub fn best_config(&self) -> &ModelConfig {
        &self.rows[self.best].config
    }
}

/// Trains every candidate, scores validation F1 and keeps the earliest maximum.
pub fn grid_search(
    candidates: &[ModelConfig],
    train: (&Matrix, &[bool]),
    val: (&Matrix, &[bool]),
    seed: u64,
) -> Result<GridResult> {
    if candidates.is_empty() {
        return Err(Error::invalid("search grid is empty"));
    }
    let rows = candidates
        .par_iter()
        .map(|cfg| {
            let model = Learner::train(cfg, train.0, train.1, seed, Some(val))?;
            let pred = threshold(&model.predict_proba(val.0));
            let r = score_bool(val.1, &pred)?;
            Ok(GridRow {
                config: cfg.clone(),
                f1: r.f1,
                accuracy: r.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.f1 > rows[best].f1 {
            best = i;
        }
    }
    Ok(GridResult { rows, best })
}
