use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "lr")]
    Lr,
    #[serde(rename = "nb")]
    Nb,
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "dt")]
    Dt,
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "stack")]
    Stack,
    #[serde(rename = "mlp")]
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Lr,
        ModelKind::Nb,
        ModelKind::Svm,
        ModelKind::Dt,
        ModelKind::Rf,
        ModelKind::Stack,
        ModelKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Nb => "nb",
            ModelKind::Svm => "svm",
            ModelKind::Dt => "dt",
            ModelKind::Rf => "rf",
            ModelKind::Stack => "stack",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Lr => "Logistic Regression",
            ModelKind::Nb => "Naive Bayes",
            ModelKind::Svm => "SVM",
            ModelKind::Dt => "Decision Tree",
            ModelKind::Rf => "Random Forest",
            ModelKind::Stack => "Stacking",
            ModelKind::Mlp => "ANN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "lr" | "logistic" | "logreg" => ModelKind::Lr,
            "nb" | "naive-bayes" | "naive_bayes" => ModelKind::Nb,
            "svm" => ModelKind::Svm,
            "dt" | "tree" | "decision-tree" => ModelKind::Dt,
            "rf" | "forest" | "random-forest" => ModelKind::Rf,
            "stack" | "stacking" => ModelKind::Stack,
            "mlp" | "ann" => ModelKind::Mlp,
            other => return Err(Error::invalid(format!("unknown model kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrConfig {
    /// Inverse L2 strength.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            c: 1.0,
            tol: 1e-6,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NbVariant {
    Gaussian,
    Multinomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NbConfig {
    pub variant: NbVariant,
    /// Additive smoothing, multinomial only.
    pub alpha: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig {
            variant: NbVariant::Gaussian,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (n_features * var(X))`
    Scale,
    /// `1 / n_features`
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: Kernel,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Rbf,
            gamma: Gamma::Scale,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    None,
    Sqrt,
    /// Same as `Sqrt` for classification.
    Auto,
    Log2,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = n_features as f64;
        let k = match self {
            MaxFeatures::None => n_features,
            MaxFeatures::Sqrt | MaxFeatures::Auto => n.sqrt() as usize,
            MaxFeatures::Log2 => n.log2() as usize,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    /// Values below 2 behave as 2.
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            criterion: Criterion::Gini,
            max_depth: None,
            max_features: MaxFeatures::None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            bootstrap: true,
            tree: TreeConfig {
                max_features: MaxFeatures::Sqrt,
                ..TreeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    pub nb: NbConfig,
    pub svm: SvmConfig,
    pub dt: TreeConfig,
    pub meta: LrConfig,
    pub folds: usize,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            nb: NbConfig::default(),
            svm: SvmConfig::default(),
            dt: TreeConfig::default(),
            meta: LrConfig::default(),
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![128, 64],
            dropout: 0.2,
            epochs: 10,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelConfig {
    Lr(LrConfig),
    Nb(NbConfig),
    Svm(SvmConfig),
    Dt(TreeConfig),
    Rf(ForestConfig),
    Stack(StackConfig),
    Mlp(MlpConfig),
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Lr => ModelConfig::Lr(LrConfig::default()),
            ModelKind::Nb => ModelConfig::Nb(NbConfig::default()),
            ModelKind::Svm => ModelConfig::Svm(SvmConfig::default()),
            ModelKind::Dt => ModelConfig::Dt(TreeConfig::default()),
            ModelKind::Rf => ModelConfig::Rf(ForestConfig::default()),
            ModelKind::Stack => ModelConfig::Stack(StackConfig::default()),
            ModelKind::Mlp => ModelConfig::Mlp(MlpConfig::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Lr(_) => ModelKind::Lr,
            ModelConfig::Nb(_) => ModelKind::Nb,
            ModelConfig::Svm(_) => ModelKind::Svm,
            ModelConfig::Dt(_) => ModelKind::Dt,
            ModelConfig::Rf(_) => ModelKind::Rf,
            ModelConfig::Stack(_) => ModelKind::Stack,
            ModelConfig::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Text models use multinomial NB inside plain NB and stacking.
    pub fn for_text(mut self) -> Self {
        match &mut self {
            ModelConfig::Nb(nb) => nb.variant = NbVariant::Multinomial,
            ModelConfig::Stack(s) => s.nb.variant = NbVariant::Multinomial,
            _ => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(msg.to_string()));
        let tree_ok = |t: &TreeConfig| -> Result<()> {
            if t.min_samples_leaf == 0 {
                return bad("min_samples_leaf must be at least 1");
            }
            if t.max_depth == Some(0) {
                return bad("max_depth must be at least 1");
            }
            if let MaxFeatures::Count(0) = t.max_features {
                return bad("max_features must be at least 1");
            }
            Ok(())
        };
        let svm_ok = |s: &SvmConfig| -> Result<()> {
            if !(s.c > 0.0) {
                return bad("SVM C must be positive");
            }
            if let Gamma::Value(g) = s.gamma {
                if !(g > 0.0) {
                    return bad("gamma must be positive");
                }
            }
            Ok(())
        };
        let lr_ok = |l: &LrConfig| -> Result<()> {
            if !(l.c > 0.0) {
                return bad("LR C must be positive");
            }
            Ok(())
        };
        let nb_ok = |n: &NbConfig| -> Result<()> {
            if !(n.alpha >= 0.0) {
                return bad("alpha must be non-negative");
            }
            Ok(())
        };
        match self {
            ModelConfig::Lr(l) => lr_ok(l),
            ModelConfig::Nb(n) => nb_ok(n),
            ModelConfig::Svm(s) => svm_ok(s),
            ModelConfig::Dt(t) => tree_ok(t),
            ModelConfig::Rf(f) => {
                if f.n_trees == 0 {
                    return bad("n_trees must be at least 1");
                }
                tree_ok(&f.tree)
            }
            ModelConfig::Stack(s) => {
                if s.folds < 2 {
                    return bad("stacking needs at least 2 folds");
                }
                nb_ok(&s.nb)?;
                svm_ok(&s.svm)?;
                tree_ok(&s.dt)?;
                lr_ok(&s.meta)
            }
            ModelConfig::Mlp(m) => {
                if !(0.0..1.0).contains(&m.dropout) {
                    return bad("dropout must be in [0, 1)");
                }
                if m.batch_size == 0 || m.epochs == 0 || m.hidden.contains(&0) {
                    return bad("batch size, epochs and layer widths must be positive");
                }
                if !(m.learning_rate > 0.0) {
                    return bad("learning rate must be positive");
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shape() {
        let cfg = ModelConfig::Svm(SvmConfig {
            gamma: Gamma::Value(0.5),
            ..SvmConfig::default()
        });
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json["kind"], "svm");
        assert_eq!(json["params"]["gamma"]["value"], 0.5);
        let back: ModelConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(43), 6);
        assert_eq!(MaxFeatures::Auto.resolve(43), 6);
        assert_eq!(MaxFeatures::Log2.resolve(43), 5);
        assert_eq!(MaxFeatures::None.resolve(43), 43);
        assert_eq!(MaxFeatures::Log2.resolve(1), 1);
    }

    #[test]
    fn invariants_are_checked() {
        assert!(ModelConfig::Lr(LrConfig { c: 0.0, ..Default::default() }).validate().is_err());
        assert!(ModelConfig::Nb(NbConfig { alpha: -1.0, ..Default::default() }).validate().is_err());
        assert!(ModelConfig::Rf(ForestConfig { n_trees: 0, ..Default::default() }).validate().is_err());
        assert!(ModelConfig::Mlp(MlpConfig { dropout: 1.0, ..Default::default() }).validate().is_err());
        for kind in ModelKind::ALL {
            ModelConfig::default_for(kind).validate().unwrap();
        }
    }
}
