//! TF-IDF vectorization and word-embedding tables.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::matrix::{Csr, Matrix};

/// Unigram TF-IDF with smoothed idf `ln((1 + N) / (1 + df)) + 1` and L2-normalized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub df: Vec<usize>,
    pub doc_count: usize,
}

fn doc_tokens(doc: &str) -> impl Iterator<Item = &str> {
    doc.split_whitespace()
}

impl TfidfModel {
    /// `docs` are already preprocessed, space-separated token strings.
    pub fn fit<S: AsRef<str>>(docs: &[S]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("cannot fit TF-IDF on an empty corpus"));
        }
        let mut df_map: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc_tokens(doc.as_ref()).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df_map.entry(t.to_string()).or_default() += 1;
            }
        }
        if df_map.is_empty() {
            return Err(Error::invalid("TF-IDF training corpus contains no tokens"));
        }
        let n = docs.len();
        let mut vocabulary = BTreeMap::new();
        let mut df = Vec::with_capacity(df_map.len());
        let mut idf = Vec::with_capacity(df_map.len());
        for (j, (tok, d)) in df_map.into_iter().enumerate() {
            idf.push(((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0);
            df.push(d);
            vocabulary.insert(tok, j);
        }
        Ok(TfidfModel {
            vocabulary,
            idf,
            df,
            doc_count: n,
        })
    }

    pub fn n_features(&self) -> usize {
        self.idf.len()
    }

    /// Sparse `(column, weight)` pairs sorted by column; unknown tokens are ignored.
    pub fn transform(&self, doc: &str) -> Vec<(usize, f64)> {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc_tokens(doc) {
            if let Some(&j) = self.vocabulary.get(t) {
                *tf.entry(j).or_default() += 1.0;
            }
        }
        let mut row: Vec<(usize, f64)> = tf.into_iter().map(|(j, c)| (j, c * self.idf[j])).collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        row
    }

    pub fn transform_many<S: AsRef<str>>(&self, docs: &[S]) -> Matrix {
        let rows: Vec<Vec<(usize, f64)>> = docs.iter().map(|d| self.transform(d.as_ref())).collect();
        Matrix::Sparse(Csr::from_rows(self.n_features(), &rows).expect("columns come from the vocabulary"))
    }
}

/// Word vectors loaded from a whitespace-separated text file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub name: String,
    pub dim: usize,
    index: HashMap<String, usize>,
    words: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn from_entries(name: impl Into<String>, entries: Vec<(String, Vec<f32>)>) -> Result<Self> {
        let dim = entries
            .first()
            .map(|e| e.1.len())
            .ok_or_else(|| Error::invalid("embedding table needs at least one entry"))?;
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut t = EmbeddingTable {
            name: name.into(),
            dim,
            index: HashMap::new(),
            words: Vec::new(),
            data: Vec::new(),
        };
        for (k, (w, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("expected {dim} values, found {}", v.len()),
                });
            }
            t.push(w, &v);
        }
        Ok(t)
    }

    fn push(&mut self, word: String, v: &[f32]) -> bool {
        if self.index.contains_key(&word) {
            return false;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(v);
        true
    }

    /// `word v1 ... vd` per line with an optional `count dim` header line.
    /// Duplicate words keep their first vector.
    pub fn read<R: BufRead>(reader: R, name: impl Into<String>) -> Result<Self> {
        let mut t = EmbeddingTable {
            name: name.into(),
            dim: 0,
            index: HashMap::new(),
            words: Vec::new(),
            data: Vec::new(),
        };
        let mut header_dim = None;
        for (k, line) in reader.lines().enumerate() {
            let line_no = k + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let rest: Vec<&str> = parts.collect();
            if k == 0 && rest.len() == 1 {
                if let (Ok(_), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                    header_dim = Some(d);
                    continue;
                }
            }
            let v: Vec<f32> = rest
                .iter()
                .map(|s| s.parse::<f32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad vector component: {e}"),
                })?;
            let expected = if t.dim > 0 { Some(t.dim) } else { header_dim };
            match expected {
                Some(d) if d != v.len() => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected {d} values, found {}", v.len()),
                    })
                }
                _ => {}
            }
            if v.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "word has no vector".into(),
                });
            }
            t.dim = v.len();
            if !t.push(word.to_string(), &v) {
                log::warn!("duplicate embedding for {word:?} at line {line_no}; keeping the first");
            }
        }
        if t.words.is_empty() {
            return Err(Error::invalid("embedding file has no vectors"));
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read(std::io::BufReader::new(f), name)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Sum of the vectors of in-vocabulary tokens and the number of hits.
    pub fn embed_text(&self, text: &str) -> (Vec<f64>, usize) {
        let mut out = vec![0.0; self.dim];
        let mut hits = 0;
        for tok in text.split_whitespace() {
            if let Some(v) = self.get(tok) {
                out.iter_mut().zip(v).for_each(|(o, x)| *o += *x as f64);
                hits += 1;
            }
        }
        (out, hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idf_hand_values() {
        let m = TfidfModel::fit(&["a b", "a c"]).unwrap();
        let a = m.vocabulary["a"];
        let b = m.vocabulary["b"];
        assert_eq!(m.df[a], 2);
        assert_eq!(m.df[b], 1);
        assert!((m.idf[a] - 1.0).abs() < 1e-12);
        assert!((m.idf[b] - ((1.5f64).ln() + 1.0)).abs() < 1e-12);
        assert_eq!(m.transform("a a"), vec![(a, 1.0)]);
        assert!(m.transform("zzz qqq").is_empty());
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(TfidfModel::fit::<&str>(&[]).is_err());
    }

    #[test]
    fn embedding_formats() {
        let t = EmbeddingTable::read("cat 1 0\ndog 0 1\n".as_bytes(), "t").unwrap();
        assert_eq!((t.dim, t.len()), (2, 2));
        let t = EmbeddingTable::read("2 2\ncat 1 0\ndog 0 1\n".as_bytes(), "t").unwrap();
        assert_eq!((t.dim, t.len()), (2, 2));
        let err = EmbeddingTable::read("cat 1 0\ndog 0 1 2\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let t = EmbeddingTable::read("cat 1 0\ncat 5 5\n".as_bytes(), "t").unwrap();
        assert_eq!(t.get("cat"), Some(&[1.0f32, 0.0][..]));
    }

    #[test]
    fn embed_sums_vectors() {
        let t = EmbeddingTable::from_entries(
            "t",
            vec![("a".into(), vec![1.0, 0.0]), ("b".into(), vec![0.0, 2.0])],
        )
        .unwrap();
        assert_eq!(t.embed_text("a b"), (vec![1.0, 2.0], 2));
        assert_eq!(t.embed_text("b a"), (vec![1.0, 2.0], 2));
        assert_eq!(t.embed_text("zzz"), (vec![0.0, 0.0], 0));
    }
}
