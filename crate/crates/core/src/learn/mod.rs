//! From-scratch binary classifiers, grid search and model artifacts.
//!
//! The positive class (`true`, label 1) is always `Misinformative`.

pub mod bayes;
pub mod config;
pub mod grid;
pub mod logistic;
pub mod matrix;
pub mod mlp;
pub mod stack;
pub mod svm;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, Verdict};
use crate::error::{Error, Result};
use crate::features::{FeaturePipeline, FeatureTable};
use crate::textprep::{preprocess, PrepConfig};
use crate::vectorize::TfidfModel;

pub use config::{
    Criterion, ForestConfig, Gamma, Kernel, LrConfig, MaxFeatures, MlpConfig, ModelConfig, ModelKind,
    NbConfig, NbVariant, StackConfig, SvmConfig, TreeConfig,
};
pub use grid::{grid_search, GridResult, GridRow, ParamGrid};
pub use matrix::{Csr, Matrix, RowRef};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn check_training_set(x: &Matrix, y: &[bool]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::Training("need at least two training rows".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    if !x.is_finite() {
        return Err(Error::Training("training matrix has non-finite values".into()));
    }
    Ok(())
}

/// Learned parameters of any supported model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Learner {
    Lr(logistic::LogisticRegression),
    Nb(stack::NaiveBayes),
    Svm(svm::Svm),
    Dt(tree::DecisionTree),
    Rf(tree::RandomForest),
    Stack(stack::Stacking),
    Mlp(mlp::Mlp),
}

impl Learner {
    /// `validation` only affects the network's epoch selection.
    pub fn train(
        config: &ModelConfig,
        x: &Matrix,
        y: &[bool],
        seed: u64,
        validation: Option<(&Matrix, &[bool])>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(match config {
            ModelConfig::Lr(c) => Learner::Lr(logistic::LogisticRegression::fit(x, y, c)?),
            ModelConfig::Nb(c) => Learner::Nb(stack::NaiveBayes::fit(x, y, c)?),
            ModelConfig::Svm(c) => Learner::Svm(svm::Svm::fit(x, y, c)?),
            ModelConfig::Dt(c) => Learner::Dt(tree::DecisionTree::fit(x, y, c, seed)?),
            ModelConfig::Rf(c) => Learner::Rf(tree::RandomForest::fit(x, y, c, seed)?),
            ModelConfig::Stack(c) => Learner::Stack(stack::Stacking::fit(x, y, c, seed)?),
            ModelConfig::Mlp(c) => Learner::Mlp(mlp::Mlp::fit(x, y, validation, c, seed)?),
        })
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        let p = match self {
            Learner::Lr(m) => m.predict_proba(x),
            Learner::Nb(m) => m.predict_proba(x),
            Learner::Svm(m) => m.predict_proba(x),
            Learner::Dt(m) => m.predict_proba(x),
            Learner::Rf(m) => m.predict_proba(x),
            Learner::Stack(m) => m.predict_proba(x),
            Learner::Mlp(m) => m.predict_proba(x),
        };
        p.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

pub fn threshold(proba: &[f64]) -> Vec<bool> {
    proba.iter().map(|&p| p >= 0.5).collect()
}

/// What the model's input columns mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Binding {
    /// Tweet features through a fitted encode/scale/select pipeline.
    Features { pipeline: FeaturePipeline },
    /// Raw text through preprocessing and TF-IDF.
    Text { prep: PrepConfig, tfidf: TfidfModel },
    /// Plain named numeric columns.
    Columns { names: Vec<String> },
}

impl Binding {
    pub fn width(&self) -> usize {
        match self {
            Binding::Features { pipeline } => pipeline.output_names().len(),
            Binding::Text { tfidf, .. } => tfidf.n_features(),
            Binding::Columns { names } => names.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub n_train: usize,
    pub n_features: usize,
    pub positive_class: Verdict,
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub params: Learner,
    pub binding: Binding,
    pub meta: TrainingMeta,
}

impl TrainedModel {
    pub fn train(
        config: &ModelConfig,
        x: &Matrix,
        y: &[bool],
        seed: u64,
        validation: Option<(&Matrix, &[bool])>,
        binding: Binding,
    ) -> Result<Self> {
        if binding.width() != x.n_cols() {
            return Err(Error::Schema(format!(
                "binding describes {} columns but the training matrix has {}",
                binding.width(),
                x.n_cols()
            )));
        }
        let params = Learner::train(config, x, y, seed, validation)?;
        Ok(TrainedModel {
            schema_version: MODEL_SCHEMA_VERSION,
            kind: config.kind(),
            config: config.clone(),
            params,
            binding,
            meta: TrainingMeta {
                seed,
                n_train: x.n_rows(),
                n_features: x.n_cols(),
                positive_class: Verdict::Misinformative,
            },
        })
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.binding.width() {
            return Err(Error::Schema(format!(
                "model expects {} columns, got {}",
                self.binding.width(),
                x.n_cols()
            )));
        }
        Ok(self.params.predict_proba(x))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<Verdict>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| Verdict::from_positive(p >= 0.5))
            .collect())
    }

    /// Raw texts for a text-bound model.
    pub fn text_matrix<S: AsRef<str>>(&self, texts: &[S]) -> Result<Matrix> {
        match &self.binding {
            Binding::Text { prep, tfidf } => {
                let docs: Vec<String> = texts.iter().map(|t| preprocess(t.as_ref(), prep)).collect();
                Ok(tfidf.transform_many(&docs))
            }
            _ => Err(Error::Schema("model is not bound to text input".into())),
        }
    }

    pub fn predict_texts<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<f64>> {
        self.predict_proba(&self.text_matrix(texts)?)
    }

    /// Extracted tweet features for a feature-bound model.
    pub fn feature_matrix(&self, table: &FeatureTable) -> Result<Matrix> {
        match &self.binding {
            Binding::Features { pipeline } => {
                let frame = pipeline.transform(table)?;
                Matrix::from_flat(frame.n_cols(), frame.data().to_vec())
            }
            _ => Err(Error::Schema("model is not bound to tweet features".into())),
        }
    }

    pub fn predict_table(&self, table: &FeatureTable) -> Result<Vec<f64>> {
        self.predict_proba(&self.feature_matrix(table)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Schema("model artifact has no schema_version".into()))?;
        if found != MODEL_SCHEMA_VERSION as u64 {
            return Err(Error::Version {
                found: found.min(u32::MAX as u64) as u32,
                expected: MODEL_SCHEMA_VERSION,
            });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
