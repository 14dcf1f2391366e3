use serde::{Deserialize, Serialize};

use super::frame::FeatureFrame;
use crate::error::{Error, Result};
use crate::learn::{matrix::Matrix, tree::RandomForest, ForestConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeResult {
    /// Surviving features in input order.
    pub selected: Vec<String>,
    /// Every input feature, best first: survivors by final importance, then
    /// eliminated features in reverse elimination order.
    pub ranking: Vec<String>,
    /// Final forest importance of each survivor, descending.
    pub importance: Vec<(String, f64)>,
}

fn forest_importance(frame: &FeatureFrame, cols: &[usize], labels: &[bool], forest: &ForestConfig, seed: u64) -> Result<Vec<f64>> {
    let x = Matrix::from_flat(frame.n_cols(), frame.data().to_vec())?.select_columns(cols);
    Ok(RandomForest::fit(&x, labels, forest, seed)?.importance)
}

/// Recursive feature elimination, dropping the least important feature per round.
pub fn rfe_select(
    frame: &FeatureFrame,
    labels: &[bool],
    target_k: usize,
    forest: &ForestConfig,
    seed: u64,
) -> Result<RfeResult> {
    let d = frame.n_cols();
    if target_k == 0 {
        return Err(Error::invalid("target_k must be at least 1"));
    }
    if target_k > d {
        return Err(Error::invalid(format!("target_k {target_k} exceeds the {d} available features")));
    }
    if labels.len() != frame.n_rows() {
        return Err(Error::DimensionMismatch { left: frame.n_rows(), right: labels.len() });
    }
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut eliminated = Vec::new();
    while remaining.len() > target_k {
        let imp = forest_importance(frame, &remaining, labels, forest, seed)?;
        let mut worst = 0;
        for (k, v) in imp.iter().enumerate() {
            if *v < imp[worst] {
                worst = k;
            }
        }
        eliminated.push(remaining.remove(worst));
    }
    let imp = forest_importance(frame, &remaining, labels, forest, seed)?;
    let mut order: Vec<usize> = (0..remaining.len()).collect();
    order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
    let name = |j: usize| frame.schema[j].clone();
    let importance: Vec<(String, f64)> = order.iter().map(|&k| (name(remaining[k]), imp[k])).collect();
    let mut ranking: Vec<String> = importance.iter().map(|(n, _)| n.clone()).collect();
    ranking.extend(eliminated.iter().rev().map(|&j| name(j)));
    Ok(RfeResult {
        selected: remaining.iter().map(|&j| name(j)).collect(),
        ranking,
        importance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planted(n: usize, d: usize, signal: usize, seed: u64) -> (FeatureFrame, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let labels = rows.iter().map(|r| r[signal] > 0.0).collect();
        let schema = (0..d).map(|j| format!("f{j}")).collect();
        (FeatureFrame::new(schema, rows).unwrap(), labels)
    }

    fn small_forest() -> ForestConfig {
        ForestConfig { n_trees: 10, ..ForestConfig::default() }
    }

    #[test]
    fn keeps_the_planted_feature() {
        let (f, y) = planted(120, 6, 3, 5);
        let r = rfe_select(&f, &y, 1, &small_forest(), 1).unwrap();
        assert_eq!(r.selected, vec!["f3".to_string()]);
        assert_eq!(r.ranking[0], "f3");
    }

    #[test]
    fn full_k_is_identity_and_ranking_is_permutation() {
        let (f, y) = planted(60, 5, 0, 2);
        let r = rfe_select(&f, &y, 5, &small_forest(), 0).unwrap();
        assert_eq!(r.selected, f.schema);
        let r = rfe_select(&f, &y, 2, &small_forest(), 0).unwrap();
        let mut names = r.ranking.clone();
        names.sort();
        assert_eq!(names, f.schema);
        assert_eq!(r.selected.len(), 2);
    }

    #[test]
    fn zero_or_oversized_target_fails() {
        let (f, y) = planted(20, 3, 0, 2);
        assert!(rfe_select(&f, &y, 0, &small_forest(), 0).is_err());
        assert!(rfe_select(&f, &y, 4, &small_forest(), 0).is_err());
    }
}
