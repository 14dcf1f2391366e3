use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bayes::{GaussianNb, MultinomialNb};
use super::config::{NbConfig, NbVariant, StackConfig};
use super::logistic::LogisticRegression;
use super::matrix::Matrix;
use super::svm::Svm;
use super::tree::DecisionTree;
use super::check_training_set;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum NaiveBayes {
    Gaussian(GaussianNb),
    Multinomial(MultinomialNb),
}

impl NaiveBayes {
    pub fn fit(x: &Matrix, y: &[bool], cfg: &NbConfig) -> Result<Self> {
        Ok(match cfg.variant {
            NbVariant::Gaussian => NaiveBayes::Gaussian(GaussianNb::fit(x, y)?),
            NbVariant::Multinomial => NaiveBayes::Multinomial(MultinomialNb::fit(x, y, cfg.alpha)?),
        })
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        match self {
            NaiveBayes::Gaussian(m) => m.predict_proba(x),
            NaiveBayes::Multinomial(m) => m.predict_proba(x),
        }
    }
}

/// Naive Bayes, SVM and a decision tree feeding a logistic-regression meta-learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stacking {
    pub nb: NaiveBayes,
    pub svm: Svm,
    pub dt: DecisionTree,
    pub meta: LogisticRegression,
}

pub const META_FEATURES: usize = 3;

/// Fold assignment of `n` rows into `k` contiguous blocks of a seeded shuffle.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos * k / n.max(1)].push(i);
    }
    folds
}

impl Stacking {
    fn fit_bases(x: &Matrix, y: &[bool], cfg: &StackConfig, seed: u64) -> Result<(NaiveBayes, Svm, DecisionTree)> {
        Ok((
            NaiveBayes::fit(x, y, &cfg.nb)?,
            Svm::fit(x, y, &cfg.svm)?,
            DecisionTree::fit(x, y, &cfg.dt, seed)?,
        ))
    }

    fn meta_rows(nb: &NaiveBayes, svm: &Svm, dt: &DecisionTree, x: &Matrix) -> Vec<[f64; META_FEATURES]> {
        let (a, b, c) = (nb.predict_proba(x), svm.predict_proba(x), dt.predict_proba(x));
        (0..x.n_rows()).map(|i| [a[i], b[i], c[i]]).collect()
    }

    /// Out-of-fold base probabilities train the meta-learner; bases are then refit on all rows.
    pub fn fit(x: &Matrix, y: &[bool], cfg: &StackConfig, seed: u64) -> Result<Self> {
        check_training_set(x, y)?;
        let n = x.n_rows();
        if n < cfg.folds {
            return Err(Error::Training(format!(
                "stacking with {} folds needs at least {} rows",
                cfg.folds, cfg.folds
            )));
        }
        let folds = kfold_indices(n, cfg.folds, seed);
        let mut meta_x = vec![[0.0; META_FEATURES]; n];
        for held in &folds {
            let mut in_fold = vec![false; n];
            held.iter().for_each(|&i| in_fold[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
            let tx = x.select_rows(&train);
            let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let (nb, svm, dt) = Self::fit_bases(&tx, &ty, cfg, seed)?;
            let hx = x.select_rows(held);
            for (&i, row) in held.iter().zip(Self::meta_rows(&nb, &svm, &dt, &hx)) {
                meta_x[i] = row;
            }
        }
        let meta_matrix = Matrix::dense(&meta_x.iter().map(|r| r.to_vec()).collect::<Vec<_>>())?;
        let meta = LogisticRegression::fit(&meta_matrix, y, &cfg.meta)?;
        let (nb, svm, dt) = Self::fit_bases(x, y, cfg, seed)?;
        Ok(Stacking { nb, svm, dt, meta })
    }

    pub fn meta_features(&self, x: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = Self::meta_rows(&self.nb, &self.svm, &self.dt, x)
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        Matrix::dense(&rows).expect("fixed-width meta rows")
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        self.meta.predict_proba(&self.meta_features(x))
    }
}
