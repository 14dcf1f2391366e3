//! Loading helpers shared by the subcommands.

use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::{bail, Context, Result};
use infodemic_core::corpus::{load_dataset, DatasetSchema, LoadedDataset, Verdict};
use infodemic_core::features::{read_feature_csv, FeatureTable, Lexicons};

use crate::Schema;

/// Picks the dataset schema from the file's columns when asked to.
pub fn resolve_schema(schema: Schema, path: &Path) -> Result<DatasetSchema> {
    Ok(match schema {
        Schema::Dataset1 => DatasetSchema::DatasetI,
        Schema::Dataset2 => DatasetSchema::DatasetII,
        Schema::Constraint => DatasetSchema::ConstraintAAAI,
        Schema::Auto => {
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let mut first = String::new();
            BufReader::new(file).read_line(&mut first)?;
            let first = first.trim().to_ascii_lowercase();
            let has = |k: &str| {
                if first.starts_with('{') {
                    first.contains(&format!("\"{k}\""))
                } else {
                    first.split(',').any(|c| c.trim().trim_matches('"') == k)
                }
            };
            if has("content") {
                DatasetSchema::DatasetI
            } else if has("text") {
                DatasetSchema::DatasetII
            } else if has("tweet") && has("label") {
                DatasetSchema::ConstraintAAAI
            } else {
                bail!("cannot infer the dataset schema of {}; pass --schema", path.display())
            }
        }
    })
}

pub fn load(path: &Path, schema: Schema) -> Result<LoadedDataset> {
    let schema = resolve_schema(schema, path)?;
    let loaded = load_dataset(path, schema).with_context(|| format!("loading {}", path.display()))?;
    for e in &loaded.row_errors {
        eprintln!("{}:{}: skipped row: {}", path.display(), e.line, e.message);
    }
    Ok(loaded)
}

/// `(ids, texts, verdicts)` of any labeled dataset.
pub fn labeled_texts(path: &Path, schema: Schema) -> Result<(Vec<String>, Vec<String>, Vec<Verdict>)> {
    let loaded = load(path, schema)?;
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    let mut verdicts = Vec::new();
    for (id, text, v) in loaded.records.labeled() {
        ids.push(id.to_string());
        texts.push(text.to_string());
        verdicts.push(v);
    }
    Ok((ids, texts, verdicts))
}

pub fn lexicons(dir: Option<&Path>) -> Result<Lexicons> {
    Ok(match dir {
        Some(d) => Lexicons::from_dir(d).with_context(|| format!("lexicons in {}", d.display()))?,
        None => Lexicons::default(),
    })
}

fn is_feature_csv(path: &Path) -> Result<bool> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    Ok(first.starts_with("id,verdict,"))
}

/// Feature table from either a feature CSV or raw Dataset I rows.
pub fn feature_table(path: &Path, lex: &Lexicons) -> Result<FeatureTable> {
    if is_feature_csv(path)? {
        return read_feature_csv(path).with_context(|| format!("reading {}", path.display()));
    }
    let records = load(path, Schema::Dataset1)?.records.into_tweets()?;
    Ok(FeatureTable::from_records(&records, lex))
}

pub fn labels(table: &FeatureTable) -> Result<Vec<bool>> {
    table.targets().context("feature rows need verdicts")
}
