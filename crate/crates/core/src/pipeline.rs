//! End-to-end runs driven by a TOML manifest: ingest, split, featurize,
//! select, train, evaluate, and optionally similarity voting.
//!
//! ```toml
//! seed = 7
//! out_dir = "runs/sample"
//!
//! [dataset]
//! path = "data/dataset1.csv"
//! schema = "dataset1"
//!
//! [split]
//! train = 0.6
//! val = 0.2
//! test = 0.2
//!
//! [features]
//! select_k = 20
//! rfe_trees = 25
//!
//! [network]
//! models = ["lr", "nb", "svm", "dt", "rf", "stack", "mlp"]
//!
//! [content]
//! models = ["lr", "nb", "svm", "dt", "rf", "stack"]
//!
//! [similarity]
//! embeddings = "data/embeddings.vec"
//! metric = "cosine"
//! k = 5
//! ```
//!
//! Relative paths resolve against the manifest's directory. Artifacts carry
//! no timestamps, so equal manifests and seeds give byte-identical outputs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_dataset, split, write_atomic, DatasetSchema, Labeled, SplitSpec, TweetRecord};
use crate::error::{Error, Result};
use crate::evaluate::{score_bool, write_report, EvalReport, ReportFormat};
use crate::features::{rfe_select, write_feature_csv, FeaturePipeline, FeatureTable, Lexicons};
use crate::learn::{Binding, ForestConfig, Matrix, ModelConfig, ModelKind, TrainedModel};
use crate::simclass::{classify_vector, tune_k, Metric, ReferenceIndex, SimilarityConfig, TieRule};
use crate::textprep::{preprocess, PrepConfig};
use crate::vectorize::{EmbeddingTable, TfidfModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
    #[serde(default = "default_schema")]
    pub schema: String,
}

fn default_schema() -> String {
    "dataset1".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { train: 0.6, val: 0.2, test: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    #[serde(default = "default_k")]
    pub select_k: usize,
    #[serde(default = "default_rfe_trees")]
    pub rfe_trees: usize,
    pub lexicon_dir: Option<PathBuf>,
}

fn default_k() -> usize {
    20
}

fn default_rfe_trees() -> usize {
    25
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection { select_k: default_k(), rfe_trees: default_rfe_trees(), lexicon_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub models: Vec<String>,
    /// Overrides the forest size for `rf` models.
    pub rf_trees: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    pub embeddings: PathBuf,
    #[serde(default = "default_metric")]
    pub metric: String,
    #[serde(default = "default_sim_k")]
    pub k: usize,
    #[serde(default = "default_k_max")]
    pub tune_k_max: usize,
}

fn default_metric() -> String {
    "cosine".into()
}

fn default_sim_k() -> usize {
    5
}

fn default_k_max() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default)]
    pub network: ModelSection,
    #[serde(default)]
    pub content: ModelSection,
    pub similarity: Option<SimilaritySection>,
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("run manifest: {e}")))
    }

    /// Reads a manifest and resolves its relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.resolve(base);
        Ok(m)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.dataset.path);
        if let Some(d) = &mut self.features.lexicon_dir {
            fix(d);
        }
        if let Some(s) = &mut self.similarity {
            fix(&mut s.embeddings);
        }
    }

    /// Every referenced input must exist before anything is written.
    pub fn check_inputs(&self) -> Result<()> {
        let mut paths = vec![&self.dataset.path];
        if let Some(d) = &self.features.lexicon_dir {
            paths.push(d);
        }
        if let Some(s) = &self.similarity {
            paths.push(&s.embeddings);
        }
        for p in paths {
            if !p.exists() {
                return Err(Error::invalid(format!("manifest path {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

fn kinds(names: &[String]) -> Result<Vec<ModelKind>> {
    names.iter().map(|n| n.parse()).collect()
}

fn model_config(kind: ModelKind, section: &ModelSection) -> ModelConfig {
    let mut cfg = ModelConfig::default_for(kind);
    if let (ModelConfig::Rf(f), Some(n)) = (&mut cfg, section.rf_trees) {
        f.n_trees = n;
    }
    cfg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIds {
    pub seed: u64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub rows: usize,
    pub row_errors: usize,
    pub split_sizes: (usize, usize, usize),
    pub selected_features: Vec<String>,
    pub best_similarity_k: Option<usize>,
    pub artifacts: Vec<String>,
    pub reports: Vec<EvalReport>,
}

struct Outputs<'a> {
    dir: &'a Path,
    written: BTreeSet<String>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.written.insert(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        write_atomic(self.path(name), s.as_bytes())
    }
}

fn texts(records: &[TweetRecord]) -> Vec<&str> {
    records.iter().map(|r| r.text()).collect()
}

fn targets(records: &[TweetRecord]) -> Vec<bool> {
    records.iter().map(|r| r.verdict.is_positive()).collect()
}

fn frame_matrix(pipeline: &FeaturePipeline, table: &FeatureTable) -> Result<Matrix> {
    let f = pipeline.transform(table)?;
    Matrix::from_flat(f.n_cols(), f.data().to_vec())
}

/// Runs the manifest and returns the summary also written to `run.json`.
pub fn run(manifest: &RunManifest) -> Result<RunSummary> {
    manifest.check_inputs()?;
    let seed = manifest.seed;
    let schema: DatasetSchema = manifest.dataset.schema.parse()?;
    let loaded = load_dataset(&manifest.dataset.path, schema)?;
    for e in &loaded.row_errors {
        log::warn!("{}:{}: {}", manifest.dataset.path.display(), e.line, e.message);
    }
    let row_errors = loaded.row_errors.len();
    let records = loaded.records.into_tweets()?;
    let spec = SplitSpec::new(manifest.split.train, manifest.split.val, manifest.split.test, seed)?;
    let (train, val, test) = split(&records, &spec)?;

    std::fs::create_dir_all(&manifest.out_dir).map_err(|e| Error::io(&manifest.out_dir, e))?;
    std::fs::create_dir_all(manifest.out_dir.join("models")).map_err(|e| Error::io(&manifest.out_dir, e))?;
    let mut out = Outputs { dir: &manifest.out_dir, written: BTreeSet::new() };
    let ids = |rs: &[TweetRecord]| rs.iter().map(|r| r.tweet.id.clone()).collect::<Vec<_>>();
    out.json(
        "split.json",
        &SplitIds { seed, train: ids(&train), val: ids(&val), test: ids(&test) },
    )?;

    let lex = match &manifest.features.lexicon_dir {
        Some(d) => Lexicons::from_dir(d)?,
        None => Lexicons::default(),
    };
    let all = FeatureTable::from_records(&records, &lex);
    write_feature_csv(out.path("features.csv"), &all)?;
    let train_t = FeatureTable::from_records(&train, &lex);
    let val_t = FeatureTable::from_records(&val, &lex);
    let test_t = FeatureTable::from_records(&test, &lex);
    let (y_train, y_val, y_test) = (targets(&train), targets(&val), targets(&test));

    let pipeline = FeaturePipeline::fit(&train_t)?;
    let full = pipeline.transform_full(&train_t)?;
    let k = manifest.features.select_k.min(full.n_cols());
    let forest = ForestConfig { n_trees: manifest.features.rfe_trees.max(1), ..ForestConfig::default() };
    let rfe = rfe_select(&full, &y_train, k, &forest, seed)?;
    out.json("selection.json", &serde_json::json!({ "seed": seed, "k": k, "result": &rfe }))?;
    let pipeline = pipeline.with_selection(rfe.selected.clone())?;

    let mut reports = Vec::new();
    let network = kinds(&manifest.network.models)?;
    if !network.is_empty() {
        let (xtr, xva, xte) = (
            frame_matrix(&pipeline, &train_t)?,
            frame_matrix(&pipeline, &val_t)?,
            frame_matrix(&pipeline, &test_t)?,
        );
        for kind in network {
            let cfg = model_config(kind, &manifest.network);
            let binding = Binding::Features { pipeline: pipeline.clone() };
            let model = TrainedModel::train(&cfg, &xtr, &y_train, seed, Some((&xva, &y_val)), binding)?;
            model.save(out.path(&format!("models/network-{kind}.json")))?;
            let pred = crate::learn::threshold(&model.predict_proba(&xte)?);
            reports.push(score_bool(&y_test, &pred)?.tagged(format!("network-{kind}"), "test"));
        }
    }

    let content = kinds(&manifest.content.models)?;
    if !content.is_empty() {
        let prep = PrepConfig::default();
        let docs = |rs: &[TweetRecord]| texts(rs).iter().map(|t| preprocess(t, &prep)).collect::<Vec<_>>();
        let tfidf = TfidfModel::fit(&docs(&train))?;
        let (xtr, xva, xte) = (
            tfidf.transform_many(&docs(&train)),
            tfidf.transform_many(&docs(&val)),
            tfidf.transform_many(&docs(&test)),
        );
        for kind in content {
            let cfg = model_config(kind, &manifest.content).for_text();
            let binding = Binding::Text { prep: prep.clone(), tfidf: tfidf.clone() };
            let model = TrainedModel::train(&cfg, &xtr, &y_train, seed, Some((&xva, &y_val)), binding)?;
            model.save(out.path(&format!("models/content-{kind}.json")))?;
            let pred = crate::learn::threshold(&model.predict_proba(&xte)?);
            reports.push(score_bool(&y_test, &pred)?.tagged(format!("content-{kind}"), "test"));
        }
    }

    let mut best_similarity_k = None;
    if let Some(sim) = &manifest.similarity {
        let table = EmbeddingTable::load(&sim.embeddings)?;
        let prep = PrepConfig::default();
        let index = ReferenceIndex::build(
            train.iter().map(|r| (r.id(), r.text(), r.verdict)),
            &table,
            &prep,
        );
        let embed = |rs: &[TweetRecord]| {
            rs.iter()
                .map(|r| (table.embed_text(&preprocess(r.text(), &prep)).0, r.verdict))
                .collect::<Vec<_>>()
        };
        let metric: Metric = sim.metric.parse()?;
        let cfg = SimilarityConfig { metric, k: sim.k.min(index.len()), tie_rule: TieRule::MisinformativeOnTie };
        if !val.is_empty() {
            let ks: Vec<usize> = (1..=sim.tune_k_max.min(index.len())).collect();
            let tuned = tune_k(&index, &embed(&val), &cfg, &ks)?;
            let mut csv = String::from("k,error\n");
            for r in &tuned.rows {
                csv.push_str(&format!("{},{:.6}\n", r.k, r.error));
            }
            write_atomic(out.path("tune_k.csv"), csv.as_bytes())?;
            best_similarity_k = Some(tuned.best_k);
        }
        let mut pred = Vec::with_capacity(test.len());
        for (v, _) in embed(&test) {
            pred.push(classify_vector(&v, &index, &cfg)?.verdict.is_positive());
        }
        reports.push(score_bool(&y_test, &pred)?.tagged(format!("similarity-{}", metric.as_str()), "test"));
    }

    if !reports.is_empty() {
        write_report(out.path("report.csv"), &reports, ReportFormat::Csv)?;
        write_report(out.path("report.json"), &reports, ReportFormat::Json)?;
    }
    let mut artifacts: Vec<String> = out.written.iter().cloned().collect();
    artifacts.push("run.json".into());
    let summary = RunSummary {
        seed,
        rows: records.len(),
        row_errors,
        split_sizes: (train.len(), val.len(), test.len()),
        selected_features: rfe.selected,
        best_similarity_k,
        artifacts,
        reports,
    };
    out.json("run.json", &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_defaults_and_resolution() {
        let mut m = RunManifest::parse(
            r#"
            out_dir = "out"
            [dataset]
            path = "d.csv"
            "#,
        )
        .unwrap();
        assert_eq!(m.seed, 0);
        assert_eq!(m.features.select_k, 20);
        assert_eq!(m.split, SplitSection::default());
        assert!(m.network.models.is_empty());
        m.resolve(Path::new("/base"));
        assert_eq!(m.dataset.path, PathBuf::from("/base/d.csv"));
        assert!(m.check_inputs().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunManifest::parse("out_dir = \"o\"\nbogus = 1\n[dataset]\npath = \"d\"\n").is_err());
    }
}
