use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use infodemic_core::corpus::{load_dataset, DatasetSchema};
use infodemic_core::features::Lexicons;
use infodemic_core::learn::{Binding, TrainedModel};
use infodemic_core::simclass::{Metric, ReferenceIndex};
use infodemic_core::textprep::PrepConfig;
use infodemic_core::vectorize::EmbeddingTable;
use serde::{Deserialize, Serialize};

use crate::manifest::ServiceManifest;
use crate::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Text,
    Features,
    Columns,
}

pub struct LoadedModel {
    pub tag: String,
    pub model: TrainedModel,
}

impl LoadedModel {
    pub fn input(&self) -> InputKind {
        match self.model.binding {
            Binding::Text { .. } => InputKind::Text,
            Binding::Features { .. } => InputKind::Features,
            Binding::Columns { .. } => InputKind::Columns,
        }
    }
}

pub struct Similarity {
    pub table: EmbeddingTable,
    pub index: ReferenceIndex,
    pub prep: PrepConfig,
    pub metric: Metric,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    Like,
    Dislike,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub check_id: String,
    pub vote: Vote,
    pub timestamp: String,
}

/// Append-only JSON-lines log; one writer at a time, synced before returning.
pub struct FeedbackLog {
    path: PathBuf,
    file: Mutex<File>,
    latest: Mutex<HashMap<String, (Vote, usize)>>,
}

impl FeedbackLog {
    pub fn open(path: PathBuf) -> Result<Self, ServiceError> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(FeedbackLog { path, file: Mutex::new(file), latest: Mutex::new(HashMap::new()) })
    }

    pub fn path(&self) -> &std::path::Path {
        &self.path
    }

    /// Returns the number of votes recorded for this check so far.
    pub fn append(&self, entry: &FeedbackEntry) -> std::io::Result<usize> {
        let mut line = serde_json::to_string(entry).map_err(std::io::Error::other)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        let mut latest = self.latest.lock().unwrap_or_else(|e| e.into_inner());
        let slot = latest.entry(entry.check_id.clone()).or_insert((entry.vote, 0));
        *slot = (entry.vote, slot.1 + 1);
        Ok(slot.1)
    }

    pub fn latest(&self, check_id: &str) -> Option<(Vote, usize)> {
        self.latest.lock().unwrap_or_else(|e| e.into_inner()).get(check_id).copied()
    }
}

pub struct AppState {
    pub models: Vec<LoadedModel>,
    pub lexicons: Lexicons,
    pub sentence_model: Option<String>,
    pub network_model: Option<String>,
    pub content_model: Option<String>,
    pub similarity: Option<Similarity>,
    pub datasets_dir: Option<PathBuf>,
    pub feedback: FeedbackLog,
    pub issued: RwLock<HashSet<String>>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn from_manifest(m: &ServiceManifest) -> Result<Self, ServiceError> {
        let mut models = Vec::with_capacity(m.models.len());
        let mut seen = HashSet::new();
        for entry in &m.models {
            if !seen.insert(entry.tag.clone()) {
                return Err(ServiceError::Manifest(format!("duplicate model tag {:?}", entry.tag)));
            }
            let model = TrainedModel::load(&entry.path)
                .map_err(|source| ServiceError::Model { tag: entry.tag.clone(), source })?;
            models.push(LoadedModel { tag: entry.tag.clone(), model });
        }
        let state_models = |tag: &Option<String>, want: InputKind, role: &str| -> Result<(), ServiceError> {
            if let Some(t) = tag {
                match models.iter().find(|lm| &lm.tag == t) {
                    None => return Err(ServiceError::Manifest(format!("{role} {t:?} is not a loaded model"))),
                    Some(lm) if lm.input() != want => {
                        return Err(ServiceError::Manifest(format!("{role} {t:?} has the wrong input type")))
                    }
                    _ => {}
                }
            }
            Ok(())
        };
        state_models(&m.sentence_model, InputKind::Text, "sentence_model")?;
        state_models(&m.network_model, InputKind::Features, "network_model")?;
        state_models(&m.content_model, InputKind::Text, "content_model")?;

        let lexicons = match &m.lexicon_dir {
            Some(d) => Lexicons::from_dir(d)?,
            None => Lexicons::default(),
        };
        let similarity = match &m.similarity {
            Some(s) => {
                let table = EmbeddingTable::load(&s.embeddings)?;
                let schema: DatasetSchema = s.schema.parse()?;
                let loaded = load_dataset(&s.index, schema)?;
                let prep = PrepConfig::default();
                let index = ReferenceIndex::build(loaded.records.labeled(), &table, &prep);
                Some(Similarity { table, index, prep, metric: s.metric.parse()?, k: s.k })
            }
            None => None,
        };
        Ok(AppState {
            models,
            lexicons,
            sentence_model: m.sentence_model.clone(),
            network_model: m.network_model.clone(),
            content_model: m.content_model.clone(),
            similarity,
            datasets_dir: m.datasets_dir.clone(),
            feedback: FeedbackLog::open(m.feedback_log.clone())?,
            issued: RwLock::new(HashSet::new()),
        })
    }

    pub fn model(&self, tag: &str) -> Option<&LoadedModel> {
        self.models.iter().find(|m| m.tag == tag)
    }

    pub fn issue_check_id(&self) -> String {
        let id = uuid::Uuid::new_v4().to_string();
        self.issued.write().unwrap_or_else(|e| e.into_inner()).insert(id.clone());
        id
    }

    pub fn is_issued(&self, id: &str) -> bool {
        self.issued.read().unwrap_or_else(|e| e.into_inner()).contains(id)
    }
}
