//! Startup manifest naming the model artifacts, similarity index and data files.
//!
//! ```toml
//! port = 8080
//! feedback_log = "feedback.jsonl"
//! datasets_dir = "data"
//! sentence_model = "content-nb"
//! network_model = "network-rf"
//! content_model = "content-stack"
//!
//! [[models]]
//! tag = "content-nb"
//! path = "runs/dataset1/models/content-nb.json"
//!
//! [similarity]
//! embeddings = "data/embeddings.vec"
//! index = "data/dataset1.csv"
//! schema = "dataset1"
//! metric = "cosine"
//! k = 5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub tag: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityEntry {
    pub embeddings: PathBuf,
    /// Labeled dataset whose texts form the reference index.
    pub index: PathBuf,
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default = "default_metric")]
    pub metric: String,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_schema() -> String {
    "dataset1".into()
}

fn default_metric() -> String {
    "cosine".into()
}

fn default_k() -> usize {
    5
}

fn default_port() -> u16 {
    8080
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceManifest {
    #[serde(default = "default_port")]
    pub port: u16,
    pub feedback_log: PathBuf,
    pub datasets_dir: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub sentence_model: Option<String>,
    pub network_model: Option<String>,
    pub content_model: Option<String>,
    #[serde(default)]
    pub models: Vec<ModelEntry>,
    pub similarity: Option<SimilarityEntry>,
}

impl ServiceManifest {
    pub fn parse(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Manifest(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Manifest(format!("{}: {e}", path.display())))?;
        let mut m = Self::parse(&text)?;
        m.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(m)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.feedback_log);
        if let Some(d) = &mut self.datasets_dir {
            fix(d);
        }
        if let Some(d) = &mut self.lexicon_dir {
            fix(d);
        }
        for m in &mut self.models {
            fix(&mut m.path);
        }
        if let Some(s) = &mut self.similarity {
            fix(&mut s.embeddings);
            fix(&mut s.index);
        }
    }
}
