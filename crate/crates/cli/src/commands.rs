use std::fmt::Write as _;
use std::io::Write as _;
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use infodemic_core::corpus::{split, write_atomic, write_dataset, Records, SplitSpec};
use infodemic_core::evaluate::{emit_report, score_bool, EvalReport, ReportFormat};
use infodemic_core::features::{pca2, rfe_select, write_feature_csv, FeaturePipeline, FeatureTable, RfeResult};
use infodemic_core::learn::{
    grid_search, threshold, Binding, ForestConfig, Matrix, ModelConfig, ModelKind, ParamGrid, TrainedModel,
};
use infodemic_core::pipeline::{run as run_pipeline, RunManifest};
use infodemic_core::simclass::{classify, tune_k as tune, Metric, ReferenceIndex, SimilarityConfig, TieRule};
use infodemic_core::textprep::{preprocess as prep_text, PrepConfig};
use infodemic_core::vectorize::{EmbeddingTable, TfidfModel};
use infodemic_service::ServiceManifest;
use serde::Deserialize;

use crate::inputs::{feature_table, labeled_texts, labels, lexicons, load};
use crate::{Format, InputKind, MetricArg, Schema, SeedArg};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// lr, nb, svm, dt, rf, stack or mlp.
    #[arg(long)]
    pub model: ModelKind,
    #[arg(long, value_enum, default_value = "features")]
    pub input: InputKind,
    #[arg(long)]
    pub train: PathBuf,
    /// Validation data for MLP early stopping.
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub schema: Schema,
    /// JSON model configuration, e.g. `{"kind":"lr","params":{...}}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `selection.json` from `select`; feature input only.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long)]
    pub model: ModelKind,
    #[arg(long, value_enum, default_value = "features")]
    pub input: InputKind,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub schema: Schema,
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    /// One CSV row per candidate.
    #[arg(long)]
    pub out: PathBuf,
    /// Writes the winning configuration as JSON.
    #[arg(long)]
    pub best_out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

fn report_format(f: Format) -> ReportFormat {
    match f {
        Format::Table => ReportFormat::TableText,
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    }
}

fn metric(m: MetricArg) -> Metric {
    match m {
        MetricArg::Cosine => Metric::Cosine,
        MetricArg::Euclidean => Metric::Euclidean,
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    write_atomic(path, bytes)?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow!("{e}"))?)
}

fn parse_fractions(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad --split {s:?}"))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => bail!("--split takes three fractions, e.g. 0.6,0.2,0.2"),
    }
}

fn split_path(out: &Path, part: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{part}.{ext}"),
        None => format!("{stem}.{part}"),
    };
    out.with_file_name(name)
}

pub fn ingest(schema: Schema, input: &Path, out: &Path, fractions: Option<&str>, seed: u64) -> Result<()> {
    let loaded = load(input, schema)?;
    ensure_parent(out)?;
    write_dataset(out, &loaded.records)?;
    eprintln!("{} rows kept, {} skipped", loaded.records.len(), loaded.row_errors.len());
    if let Some(f) = fractions {
        let (a, b, c) = parse_fractions(f)?;
        let spec = SplitSpec::new(a, b, c, seed)?;
        let parts = match &loaded.records {
            Records::Tweets(r) => {
                let (x, y, z) = split(r, &spec)?;
                [Records::Tweets(x), Records::Tweets(y), Records::Tweets(z)]
            }
            Records::Sentences(r) => {
                let (x, y, z) = split(r, &spec)?;
                [Records::Sentences(x), Records::Sentences(y), Records::Sentences(z)]
            }
        };
        for (name, records) in ["train", "val", "test"].iter().zip(parts.iter()) {
            write_dataset(split_path(out, name), records)?;
        }
    }
    Ok(())
}

pub fn preprocess(schema: Schema, input: &Path, out: &Path) -> Result<()> {
    let (ids, texts, verdicts) = labeled_texts(input, schema)?;
    let prep = PrepConfig::default();
    let rows = ids
        .into_iter()
        .zip(texts)
        .zip(verdicts)
        .map(|((id, t), v)| vec![id, v.as_str().to_string(), prep_text(&t, &prep)]);
    write_out(out, &csv_bytes(&["id", "verdict", "processed"], rows)?)
}

pub fn featurize(input: &Path, out: &Path, lex_dir: Option<&Path>) -> Result<()> {
    let lex = lexicons(lex_dir)?;
    let records = load(input, Schema::Dataset1)?.records.into_tweets()?;
    let table = FeatureTable::from_records(&records, &lex);
    ensure_parent(out)?;
    write_feature_csv(out, &table)?;
    Ok(())
}

#[derive(Deserialize)]
struct SelectionDoc {
    result: RfeResult,
}

fn read_selection(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SelectionDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.result.selected)
}

pub fn select(features: &Path, k: usize, trees: usize, out: &Path, lex_dir: Option<&Path>, seed: u64) -> Result<()> {
    let table = feature_table(features, &lexicons(lex_dir)?)?;
    let y = labels(&table)?;
    let pipeline = FeaturePipeline::fit(&table)?;
    let frame = pipeline.transform_full(&table)?;
    let forest = ForestConfig { n_trees: trees.max(1), ..ForestConfig::default() };
    let result = rfe_select(&frame, &y, k, &forest, seed)?;
    let doc = serde_json::json!({ "seed": seed, "k": k, "result": &result });
    write_out(out, format!("{}\n", serde_json::to_string_pretty(&doc)?).as_bytes())?;
    stdout(&result.selected.iter().map(|n| format!("{n}\n")).collect::<String>());
    Ok(())
}

pub fn pca(features: &Path, selection: Option<&Path>, out: &Path, lex_dir: Option<&Path>) -> Result<()> {
    let table = feature_table(features, &lexicons(lex_dir)?)?;
    let mut pipeline = FeaturePipeline::fit(&table)?;
    if let Some(s) = selection {
        pipeline = pipeline.with_selection(read_selection(s)?)?;
    }
    let frame = pipeline.transform(&table)?;
    let (coords, model) = pca2(&frame)?;
    let rows = table.ids.iter().enumerate().zip(coords).map(|((i, id), c)| {
        vec![
            id.clone(),
            table.labels.as_ref().map(|l| l[i].as_str().to_string()).unwrap_or_default(),
            format!("{:.6}", c[0]),
            format!("{:.6}", c[1]),
        ]
    });
    write_out(out, &csv_bytes(&["id", "verdict", "pc1", "pc2"], rows)?)?;
    let ev = &model.explained_variance_ratio;
    eprintln!("explained variance ratio: {:.4} {:.4}", ev[0], ev.get(1).copied().unwrap_or(0.0));
    Ok(())
}

/// Design matrices plus the binding that reproduces them at prediction time.
struct Prepared {
    x: Matrix,
    y: Vec<bool>,
    val: Option<(Matrix, Vec<bool>)>,
    binding: Binding,
}

fn prepare(
    input: InputKind,
    train: &Path,
    val: Option<&Path>,
    schema: Schema,
    selection: Option<&Path>,
    lex_dir: Option<&Path>,
) -> Result<Prepared> {
    match input {
        InputKind::Features => {
            let lex = lexicons(lex_dir)?;
            let table = feature_table(train, &lex)?;
            let mut pipeline = FeaturePipeline::fit(&table)?;
            if let Some(s) = selection {
                pipeline = pipeline.with_selection(read_selection(s)?)?;
            }
            let binding = Binding::Features { pipeline };
            let to_matrix = |t: &FeatureTable| -> Result<Matrix> {
                let Binding::Features { pipeline } = &binding else { unreachable!() };
                let f = pipeline.transform(t)?;
                Ok(Matrix::from_flat(f.n_cols(), f.data().to_vec())?)
            };
            let x = to_matrix(&table)?;
            let y = labels(&table)?;
            let val = match val {
                Some(p) => {
                    let t = feature_table(p, &lex)?;
                    Some((to_matrix(&t)?, labels(&t)?))
                }
                None => None,
            };
            Ok(Prepared { x, y, val, binding })
        }
        InputKind::Text => {
            if selection.is_some() {
                bail!("--selection applies to feature input only");
            }
            let prep = PrepConfig::default();
            let docs = |texts: &[String]| texts.iter().map(|t| prep_text(t, &prep)).collect::<Vec<_>>();
            let (_, texts, verdicts) = labeled_texts(train, schema)?;
            let train_docs = docs(&texts);
            let tfidf = TfidfModel::fit(&train_docs)?;
            let x = tfidf.transform_many(&train_docs);
            let y = verdicts.iter().map(|v| v.is_positive()).collect();
            let val = match val {
                Some(p) => {
                    let (_, t, v) = labeled_texts(p, schema)?;
                    Some((tfidf.transform_many(&docs(&t)), v.iter().map(|v| v.is_positive()).collect()))
                }
                None => None,
            };
            Ok(Prepared { x, y, val, binding: Binding::Text { prep, tfidf } })
        }
    }
}

fn base_config(kind: ModelKind, input: InputKind) -> ModelConfig {
    let cfg = ModelConfig::default_for(kind);
    match input {
        InputKind::Text => cfg.for_text(),
        InputKind::Features => cfg,
    }
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg: ModelConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            if cfg.kind() != a.model {
                bail!("--config describes {} but --model is {}", cfg.kind(), a.model);
            }
            cfg
        }
        None => base_config(a.model, a.input),
    };
    cfg.validate()?;
    let p = prepare(a.input, &a.train, a.val.as_deref(), a.schema, a.selection.as_deref(), a.lexicons.as_deref())?;
    let val = p.val.as_ref().map(|(x, y)| (x, y.as_slice()));
    let model = TrainedModel::train(&cfg, &p.x, &p.y, a.seed.seed, val, p.binding)?;
    ensure_parent(&a.out)?;
    model.save(&a.out)?;
    eprintln!("trained {} on {} rows x {} columns", a.model.display_name(), p.x.n_rows(), p.x.n_cols());
    Ok(())
}

pub fn gridsearch(a: &GridArgs) -> Result<()> {
    let p = prepare(a.input, &a.train, Some(&a.val), a.schema, a.selection.as_deref(), a.lexicons.as_deref())?;
    let (xv, yv) = p.val.as_ref().expect("validation requested");
    let candidates = ParamGrid::default_for(a.model)?.candidates(&base_config(a.model, a.input))?;
    let result = grid_search(&candidates, (&p.x, &p.y), (xv, yv), a.seed.seed)?;
    let seed = a.seed.seed.to_string();
    let rows = result
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| -> Result<Vec<String>> {
            Ok(vec![
                i.to_string(),
                serde_json::to_string(&r.config)?,
                format!("{:.4}", r.f1),
                format!("{:.4}", r.accuracy),
                (i == result.best).to_string(),
                seed.clone(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    write_out(&a.out, &csv_bytes(&["candidate", "config", "f1", "accuracy", "best", "seed"], rows)?)?;
    let best = &result.rows[result.best];
    if let Some(path) = &a.best_out {
        write_out(path, format!("{}\n", serde_json::to_string_pretty(&best.config)?).as_bytes())?;
    }
    stdout(&format!("best candidate {} of {}: f1 {:.4}\n", result.best, result.rows.len(), best.f1));
    Ok(())
}

fn model_tag(path: &Path, model: &TrainedModel) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .unwrap_or_else(|| model.kind.to_string())
}

pub fn evaluate(
    models: &[PathBuf],
    test: &Path,
    schema: Schema,
    format: Format,
    out: Option<&Path>,
    dataset_tag: &str,
    lex_dir: Option<&Path>,
) -> Result<()> {
    if models.is_empty() {
        bail!("pass at least one --model");
    }
    let mut reports: Vec<EvalReport> = Vec::new();
    for path in models {
        let model = TrainedModel::load(path).with_context(|| format!("loading {}", path.display()))?;
        let (y, proba) = match &model.binding {
            Binding::Features { .. } => {
                let table = feature_table(test, &lexicons(lex_dir)?)?;
                (labels(&table)?, model.predict_table(&table)?)
            }
            Binding::Text { .. } => {
                let (_, texts, verdicts) = labeled_texts(test, schema)?;
                (verdicts.iter().map(|v| v.is_positive()).collect(), model.predict_texts(&texts)?)
            }
            Binding::Columns { .. } => bail!("{}: column-bound models take matrices, not datasets", path.display()),
        };
        reports.push(score_bool(&y, &threshold(&proba))?.tagged(model_tag(path, &model), dataset_tag));
    }
    let text = emit_report(&reports, report_format(format))?;
    match out {
        Some(p) => write_out(p, text.as_bytes()),
        None => {
            stdout(&text);
            Ok(())
        }
    }
}

pub fn predict(
    model_path: &Path,
    input: Option<&Path>,
    text: Option<&str>,
    schema: Schema,
    out: Option<&Path>,
    lex_dir: Option<&Path>,
) -> Result<()> {
    let model = TrainedModel::load(model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let (ids, proba) = match (input, text) {
        (_, Some(t)) => (vec!["text".to_string()], model.predict_texts(&[t])?),
        (Some(p), None) => match &model.binding {
            Binding::Features { .. } => {
                let table = feature_table(p, &lexicons(lex_dir)?)?;
                (table.ids.clone(), model.predict_table(&table)?)
            }
            Binding::Text { .. } => {
                let (ids, texts, _) = labeled_texts(p, schema)?;
                (ids, model.predict_texts(&texts)?)
            }
            Binding::Columns { .. } => bail!("column-bound models take matrices, not datasets"),
        },
        (None, None) => bail!("pass --in or --text"),
    };
    let rows = ids.into_iter().zip(proba).map(|(id, p)| {
        let verdict = infodemic_core::corpus::Verdict::from_positive(p >= 0.5);
        vec![id, verdict.as_str().to_string(), format!("{p:.6}")]
    });
    let bytes = csv_bytes(&["id", "verdict", "probability"], rows)?;
    match out {
        Some(p) => write_out(p, &bytes),
        None => {
            stdout(&String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn reference_index(embeddings: &Path, index: &Path, schema: Schema) -> Result<(EmbeddingTable, ReferenceIndex)> {
    let table = EmbeddingTable::load(embeddings).with_context(|| format!("loading {}", embeddings.display()))?;
    let (ids, texts, verdicts) = labeled_texts(index, schema)?;
    let idx = ReferenceIndex::build(
        ids.iter().zip(&texts).zip(&verdicts).map(|((i, t), v)| (i.as_str(), t.as_str(), *v)),
        &table,
        &PrepConfig::default(),
    );
    if idx.is_empty() {
        bail!("reference index {} is empty", index.display());
    }
    Ok((table, idx))
}

pub fn similar(m: MetricArg, k: usize, embeddings: &Path, index: &Path, schema: Schema, text: &str) -> Result<()> {
    let (table, idx) = reference_index(embeddings, index, schema)?;
    let cfg = SimilarityConfig { metric: metric(m), k, tie_rule: TieRule::MisinformativeOnTie };
    let c = classify(text, &idx, &table, &PrepConfig::default(), &cfg)?;
    let mut s = String::new();
    writeln!(s, "verdict: {}", c.verdict)?;
    writeln!(s, "score: {:.4}", c.score)?;
    if c.fallback {
        writeln!(s, "weights vanished; majority vote used")?;
    }
    for n in &c.neighbors {
        writeln!(s, "{:.4}\t{}\t{}\t{}", n.similarity, n.verdict, n.source_id, n.text)?;
    }
    stdout(&s);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn tune_k(
    m: MetricArg,
    embeddings: &Path,
    index: &Path,
    validation: &Path,
    schema: Schema,
    k_min: usize,
    k_max: usize,
    out: Option<&Path>,
) -> Result<()> {
    if k_min == 0 || k_min > k_max {
        bail!("need 1 <= --k-min <= --k-max");
    }
    let (table, idx) = reference_index(embeddings, index, schema)?;
    let prep = PrepConfig::default();
    let (_, texts, verdicts) = labeled_texts(validation, schema)?;
    let val: Vec<(Vec<f64>, _)> = texts
        .iter()
        .zip(verdicts)
        .map(|(t, v)| (table.embed_text(&prep_text(t, &prep)).0, v))
        .collect();
    let ks: Vec<usize> = (k_min..=k_max.min(idx.len())).collect();
    if ks.is_empty() {
        bail!("--k-min exceeds the {} reference entries", idx.len());
    }
    let cfg = SimilarityConfig { metric: metric(m), k: ks[0], tie_rule: TieRule::MisinformativeOnTie };
    let result = tune(&idx, &val, &cfg, &ks)?;
    let mut csv = String::from("k,error\n");
    for r in &result.rows {
        writeln!(csv, "{},{:.6}", r.k, r.error)?;
    }
    match out {
        Some(p) => write_out(p, csv.as_bytes())?,
        None => stdout(&csv),
    }
    eprintln!("best k: {}", result.best_k);
    Ok(())
}

pub fn serve(manifest: &Path, port: Option<u16>, host: &str) -> Result<()> {
    let mut m = ServiceManifest::load(manifest)?;
    if let Some(p) = port {
        m.port = p;
    }
    let addr: SocketAddr = (host, m.port)
        .to_socket_addrs()
        .with_context(|| format!("resolving {host}"))?
        .next()
        .ok_or_else(|| anyhow!("no address for {host}"))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(infodemic_service::serve(&m, addr))?;
    Ok(())
}

pub fn run(manifest: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<()> {
    let mut m = RunManifest::load(manifest)?;
    if let Some(s) = seed {
        m.seed = s;
    }
    if let Some(d) = out_dir {
        m.out_dir = d;
    }
    let summary = run_pipeline(&m)?;
    eprintln!(
        "{} rows ({} skipped), split {:?}, artifacts in {}",
        summary.rows,
        summary.row_errors,
        summary.split_sizes,
        m.out_dir.display()
    );
    if !summary.reports.is_empty() {
        stdout(&emit_report(&summary.reports, ReportFormat::TableText)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_paths_keep_extension() {
        assert_eq!(split_path(Path::new("out/d.csv"), "val"), PathBuf::from("out/d.val.csv"));
        assert_eq!(split_path(Path::new("d"), "test"), PathBuf::from("d.test"));
    }

    #[test]
    fn fractions_parse_or_fail() {
        assert_eq!(parse_fractions("0.6, 0.2,0.2").unwrap(), (0.6, 0.2, 0.2));
        assert!(parse_fractions("0.5,0.5").is_err());
        assert!(parse_fractions("a,b,c").is_err());
    }
}
