//! Embedding-similarity classification by weighted voting over the K most
//! similar labeled texts.

use serde::{Deserialize, Serialize};

use crate::corpus::Verdict;
use crate::error::{Error, Result};
use crate::textprep::{preprocess, PrepConfig};
use crate::vectorize::EmbeddingTable;

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    MisinformativeOnTie,
    InformativeOnTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub metric: Metric,
    pub k: usize,
    pub tie_rule: TieRule,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            metric: Metric::Cosine,
            k: 5,
            tie_rule: TieRule::MisinformativeOnTie,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub vector: Vec<f64>,
    pub verdict: Verdict,
    pub source_id: String,
    pub text: String,
    pub nonzero: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceIndex {
    pub dim: usize,
    pub entries: Vec<ReferenceEntry>,
}

impl ReferenceIndex {
    pub fn new(dim: usize) -> Self {
        ReferenceIndex { dim, entries: Vec::new() }
    }

    pub fn push(&mut self, vector: Vec<f64>, verdict: Verdict, source_id: impl Into<String>, text: impl Into<String>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { left: vector.len(), right: self.dim });
        }
        let nonzero = vector.iter().any(|v| *v != 0.0);
        self.entries.push(ReferenceEntry {
            vector,
            verdict,
            source_id: source_id.into(),
            text: text.into(),
            nonzero,
        });
        Ok(())
    }

    /// Embeds each labeled text after preprocessing.
    pub fn build<'a>(
        items: impl IntoIterator<Item = (&'a str, &'a str, Verdict)>,
        table: &EmbeddingTable,
        prep: &PrepConfig,
    ) -> Self {
        let mut index = ReferenceIndex::new(table.dim);
        for (id, text, verdict) in items {
            let (v, _) = table.embed_text(&preprocess(text, prep));
            index.push(v, verdict, id, text).expect("table dimension");
        }
        index
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub source_id: String,
    pub text: String,
    pub verdict: Verdict,
    /// Cosine similarity, or Euclidean distance for that metric.
    pub similarity: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Weighted share of misinformative neighbors.
    pub score: f64,
    pub neighbors: Vec<Neighbor>,
    /// True when the unweighted majority fallback decided the verdict.
    pub fallback: bool,
}

fn decide(score: f64, tie: TieRule) -> Verdict {
    match tie {
        TieRule::MisinformativeOnTie => Verdict::from_positive(score >= 0.5),
        TieRule::InformativeOnTie => Verdict::from_positive(score > 0.5),
    }
}

/// Ranks the index against an embedded query and votes over the top K.
///
/// Cosine neighbors are ranked by similarity (zero reference vectors score 0)
/// and weighted `max(s, 0)`; Euclidean neighbors are ranked by distance and
/// weighted `1 / (1 + d)`. Equal scores keep index order. A zero query or an
/// all-zero weight sum falls back to an unweighted majority of the K.
pub fn classify_vector(query: &[f64], index: &ReferenceIndex, cfg: &SimilarityConfig) -> Result<Classification> {
    if index.is_empty() {
        return Err(Error::invalid("reference index is empty"));
    }
    if cfg.k == 0 || cfg.k > index.len() {
        return Err(Error::invalid(format!("k must be in 1..={}, got {}", index.len(), cfg.k)));
    }
    if query.len() != index.dim {
        return Err(Error::DimensionMismatch { left: query.len(), right: index.dim });
    }
    let zero_query = query.iter().all(|v| *v == 0.0);
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(index.len());
    for (i, e) in index.entries.iter().enumerate() {
        let s = match cfg.metric {
            Metric::Cosine => {
                if zero_query || !e.nonzero {
                    0.0
                } else {
                    cosine(query, &e.vector)?
                }
            }
            Metric::Euclidean => euclidean(query, &e.vector)?,
        };
        scored.push((i, s));
    }
    match cfg.metric {
        Metric::Cosine => scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))),
        Metric::Euclidean => scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))),
    }
    scored.truncate(cfg.k);
    let neighbors: Vec<Neighbor> = scored
        .into_iter()
        .map(|(i, s)| {
            let e = &index.entries[i];
            let weight = match cfg.metric {
                Metric::Cosine => s.max(0.0),
                Metric::Euclidean => 1.0 / (1.0 + s),
            };
            Neighbor {
                index: i,
                source_id: e.source_id.clone(),
                text: e.text.clone(),
                verdict: e.verdict,
                similarity: s,
                weight,
            }
        })
        .collect();
    let wsum: f64 = neighbors.iter().map(|n| n.weight).sum();
    let fallback = (zero_query && cfg.metric == Metric::Cosine) || wsum <= 0.0;
    let score = if fallback {
        neighbors.iter().filter(|n| n.verdict.is_positive()).count() as f64 / neighbors.len() as f64
    } else {
        neighbors
            .iter()
            .filter(|n| n.verdict.is_positive())
            .map(|n| n.weight)
            .sum::<f64>()
            / wsum
    };
    Ok(Classification {
        verdict: decide(score, cfg.tie_rule),
        score: score.clamp(0.0, 1.0),
        neighbors,
        fallback,
    })
}

/// Preprocesses and embeds `text`, then classifies it.
pub fn classify(
    text: &str,
    index: &ReferenceIndex,
    table: &EmbeddingTable,
    prep: &PrepConfig,
    cfg: &SimilarityConfig,
) -> Result<Classification> {
    let (q, _) = table.embed_text(&preprocess(text, prep));
    classify_vector(&q, index, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KError {
    pub k: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub rows: Vec<KError>,
    pub best_k: usize,
}

/// Misclassification rate on `validation` for each K; ties go to the smaller K.
pub fn tune_k(
    index: &ReferenceIndex,
    validation: &[(Vec<f64>, Verdict)],
    cfg: &SimilarityConfig,
    ks: &[usize],
) -> Result<TuneResult> {
    if ks.is_empty() {
        return Err(Error::invalid("empty K range"));
    }
    if validation.is_empty() {
        return Err(Error::invalid("empty validation set"));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let c = SimilarityConfig { k, ..*cfg };
        let mut wrong = 0usize;
        for (v, truth) in validation {
            if classify_vector(v, index, &c)?.verdict != *truth {
                wrong += 1;
            }
        }
        rows.push(KError { k, error: wrong as f64 / validation.len() as f64 });
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.error.total_cmp(&b.error).then(a.k.cmp(&b.k)))
        .expect("non-empty")
        .k;
    Ok(TuneResult { rows, best_k: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Verdict::{Informative as I, Misinformative as M};

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[2.0, 2.0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let v = cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((v - 0.97463).abs() < 1e-5);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(euclidean(&[0.0], &[3.0, 4.0]).is_err());
    }

    fn index_from(vectors: &[(Vec<f64>, Verdict)]) -> ReferenceIndex {
        let mut idx = ReferenceIndex::new(vectors[0].0.len());
        for (i, (v, y)) in vectors.iter().enumerate() {
            idx.push(v.clone(), *y, format!("r{i}"), format!("text {i}")).unwrap();
        }
        idx
    }

    #[test]
    fn weighted_vote_hand_example() {
        // Unit query along x; neighbors at the given cosines.
        let at = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        let idx = index_from(&[(at(0.9), M), (at(0.8), I), (at(0.7), M), (at(-0.5), I)]);
        let cfg = SimilarityConfig { k: 3, ..Default::default() };
        let r = classify_vector(&[1.0, 0.0], &idx, &cfg).unwrap();
        assert!((r.score - 1.6 / 2.4).abs() < 1e-12);
        assert_eq!(r.verdict, M);
        assert_eq!(r.neighbors.iter().map(|n| n.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn k_one_copies_nearest_label() {
        let idx = index_from(&[(vec![1.0, 0.0], I), (vec![0.0, 1.0], M)]);
        let cfg = SimilarityConfig { k: 1, metric: Metric::Euclidean, ..Default::default() };
        assert_eq!(classify_vector(&[0.1, 0.9], &idx, &cfg).unwrap().verdict, M);
        assert_eq!(classify_vector(&[0.9, 0.1], &idx, &cfg).unwrap().verdict, I);
    }

    #[test]
    fn zero_query_falls_back_to_majority_with_tie_rule() {
        let idx = index_from(&[(vec![1.0, 0.0], I), (vec![0.0, 1.0], M)]);
        let r = classify_vector(&[0.0, 0.0], &idx, &SimilarityConfig { k: 2, ..Default::default() }).unwrap();
        assert!(r.fallback);
        assert_eq!(r.score, 0.5);
        assert_eq!(r.verdict, M);
    }

    #[test]
    fn k_out_of_range() {
        let idx = index_from(&[(vec![1.0], I)]);
        assert!(classify_vector(&[1.0], &idx, &SimilarityConfig { k: 2, ..Default::default() }).is_err());
        assert!(classify_vector(&[1.0], &idx, &SimilarityConfig { k: 0, ..Default::default() }).is_err());
        assert!(classify_vector(&[1.0], &ReferenceIndex::new(1), &SimilarityConfig::default()).is_err());
    }

    #[test]
    fn tune_k_single_correct_item() {
        let idx = index_from(&[(vec![1.0, 0.0], M), (vec![0.9, 0.1], M), (vec![0.8, 0.2], M)]);
        let t = tune_k(&idx, &[(vec![1.0, 0.05], M)], &SimilarityConfig::default(), &[1, 2, 3]).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0));
        assert_eq!(t.best_k, 1);
        let t = tune_k(&idx, &[(vec![1.0, 0.05], M)], &SimilarityConfig::default(), &[3]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(tune_k(&idx, &[(vec![1.0, 0.0], M)], &SimilarityConfig::default(), &[]).is_err());
    }
}
