use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::extract::{extract_features, FeatureValue, FeatureVector, CATEGORICAL_FEATURES, FEATURE_NAMES};
use super::lexicon::Lexicons;
use crate::corpus::{write_atomic, TweetRecord, Verdict};
use crate::error::{Error, Result};

/// Extracted features before encoding; categorical columns still hold strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<FeatureValue>>,
    /// Present for labeled data.
    pub labels: Option<Vec<Verdict>>,
}

impl FeatureTable {
    pub fn from_records(records: &[TweetRecord], lex: &Lexicons) -> Self {
        let rows = records
            .iter()
            .map(|r| extract_features(&r.tweet, lex).values)
            .collect();
        FeatureTable {
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            ids: records.iter().map(|r| r.tweet.id.clone()).collect(),
            rows,
            labels: Some(records.iter().map(|r| r.verdict).collect()),
        }
    }

    pub fn from_vectors(ids: Vec<String>, vectors: Vec<FeatureVector>) -> Self {
        FeatureTable {
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            ids,
            rows: vectors.into_iter().map(|v| v.values).collect(),
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("no column named {name:?}")))
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        FeatureTable {
            names: self.names.clone(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Replaces each categorical column with its one-hot block.
    pub fn encode(&self, encoders: &[OneHotEncoder]) -> Result<FeatureFrame> {
        let by_column: BTreeMap<&str, &OneHotEncoder> =
            encoders.iter().map(|e| (e.column.as_str(), e)).collect();
        let mut schema = Vec::new();
        for name in &self.names {
            match by_column.get(name.as_str()) {
                Some(enc) => schema.extend(enc.column_names()),
                None => schema.push(name.clone()),
            }
        }
        let mut data = Vec::with_capacity(self.rows.len() * schema.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.names.len() {
                return Err(Error::Schema(format!(
                    "row {r} has {} values for {} columns",
                    row.len(),
                    self.names.len()
                )));
            }
            for (name, value) in self.names.iter().zip(row) {
                match (by_column.get(name.as_str()), value) {
                    (Some(enc), FeatureValue::Category(c)) => data.extend(enc.encode(c)),
                    (Some(enc), FeatureValue::Number(x)) => data.extend(enc.encode(&x.to_string())),
                    (None, FeatureValue::Number(x)) => data.push(*x),
                    (None, FeatureValue::Category(c)) => {
                        return Err(Error::Schema(format!(
                            "categorical value {c:?} in column {name:?} has no encoder"
                        )))
                    }
                }
            }
        }
        let mut frame = FeatureFrame::from_flat(schema, self.rows.len(), data)?;
        frame.encodings = encoders
            .iter()
            .map(|e| (e.column.clone(), e.categories.clone()))
            .collect();
        Ok(frame)
    }

    /// Label vector as booleans with the positive class `true`.
    pub fn targets(&self) -> Result<Vec<bool>> {
        self.labels
            .as_ref()
            .map(|l| l.iter().map(|v| v.is_positive()).collect())
            .ok_or_else(|| Error::invalid("feature table has no labels"))
    }
}

/// Dense numeric feature matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub schema: Vec<String>,
    n_rows: usize,
    data: Vec<f64>,
    pub scaler: Option<Scaler>,
    /// Categorical column -> its category order in the one-hot block.
    pub encodings: BTreeMap<String, Vec<String>>,
}

impl FeatureFrame {
    pub fn new(schema: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * schema.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    schema.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(schema, n, data)
    }

    pub fn from_flat(schema: Vec<String>, n_rows: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * schema.len() {
            return Err(Error::Schema(format!(
                "{} values do not fill {} rows of {} columns",
                data.len(),
                n_rows,
                schema.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            let c = schema.len().max(1);
            return Err(Error::invalid(format!(
                "non-finite value in row {} column {:?}",
                i / c,
                schema.get(i % c)
            )));
        }
        let unique: BTreeSet<&String> = schema.iter().collect();
        if unique.len() != schema.len() {
            return Err(Error::Schema("duplicate column names".into()));
        }
        Ok(FeatureFrame {
            schema,
            n_rows,
            data,
            scaler: None,
            encodings: BTreeMap::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Keeps the named columns in the given order.
    pub fn select(&self, names: &[String]) -> Result<FeatureFrame> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.schema
                    .iter()
                    .position(|s| s == n)
                    .ok_or_else(|| Error::Schema(format!("no column named {n:?}")))
            })
            .collect::<Result<_>>()?;
        self.select_indices(&idx)
    }

    pub fn select_indices(&self, idx: &[usize]) -> Result<FeatureFrame> {
        let schema = idx.iter().map(|&j| self.schema[j].clone()).collect();
        let data = self
            .rows()
            .flat_map(|r| idx.iter().map(move |&j| r[j]))
            .collect();
        let mut out = FeatureFrame::from_flat(schema, self.n_rows, data)?;
        out.encodings = self.encodings.clone();
        Ok(out)
    }

    pub fn subset_rows(&self, rows: &[usize]) -> FeatureFrame {
        let data = rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        FeatureFrame {
            schema: self.schema.clone(),
            n_rows: rows.len(),
            data,
            scaler: self.scaler.clone(),
            encodings: self.encodings.clone(),
        }
    }

    /// Fits a scaler on this frame and returns the standardized frame.
    pub fn fit_transform_scaler(&self) -> FeatureFrame {
        let scaler = Scaler::fit(self);
        scaler
            .apply(self)
            .expect("scaler fitted on this frame matches its schema")
    }
}

/// Per-column standardization with population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub columns: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(frame: &FeatureFrame) -> Scaler {
        let n = frame.n_rows().max(1) as f64;
        let c = frame.n_cols();
        let mut mean = vec![0.0; c];
        for row in frame.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; c];
        for row in frame.rows() {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        Scaler {
            columns: frame.schema.clone(),
            mean,
            std: var.into_iter().map(|v| (v / n).sqrt()).collect(),
        }
    }

    fn check(&self, frame: &FeatureFrame) -> Result<()> {
        if frame.schema != self.columns {
            return Err(Error::Schema(format!(
                "scaler fitted on {} columns cannot be applied to frame with schema {:?}",
                self.columns.len(),
                frame.schema
            )));
        }
        Ok(())
    }

    /// Columns with zero spread map to zero.
    pub fn apply(&self, frame: &FeatureFrame) -> Result<FeatureFrame> {
        self.check(frame)?;
        let c = frame.n_cols();
        let data = frame
            .data
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let j = i % c;
                if self.std[j] > 0.0 {
                    (x - self.mean[j]) / self.std[j]
                } else {
                    0.0
                }
            })
            .collect();
        Ok(FeatureFrame {
            schema: frame.schema.clone(),
            n_rows: frame.n_rows,
            data,
            scaler: Some(self.clone()),
            encodings: frame.encodings.clone(),
        })
    }

    pub fn unscale(&self, frame: &FeatureFrame) -> Result<FeatureFrame> {
        self.check(frame)?;
        let c = frame.n_cols();
        let data = frame
            .data
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let j = i % c;
                if self.std[j] > 0.0 {
                    z * self.std[j] + self.mean[j]
                } else {
                    self.mean[j]
                }
            })
            .collect();
        Ok(FeatureFrame {
            schema: frame.schema.clone(),
            n_rows: frame.n_rows,
            data,
            scaler: None,
            encodings: frame.encodings.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    pub column: String,
    /// Sorted training categories.
    pub categories: Vec<String>,
}

impl OneHotEncoder {
    pub fn fit(table: &FeatureTable, column: &str) -> Result<Self> {
        let j = table.column_index(column)?;
        let categories: BTreeSet<String> = table
            .rows
            .iter()
            .map(|r| r[j].to_string())
            .collect();
        Ok(OneHotEncoder {
            column: column.to_string(),
            categories: categories.into_iter().collect(),
        })
    }

    pub fn column_names(&self) -> Vec<String> {
        self.categories
            .iter()
            .map(|c| format!("{}={}", self.column, c))
            .collect()
    }

    /// Unseen categories encode as all zeros.
    pub fn encode(&self, value: &str) -> Vec<f64> {
        self.categories
            .iter()
            .map(|c| if c == value { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Encode -> standardize -> select, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub input_names: Vec<String>,
    pub encoders: Vec<OneHotEncoder>,
    pub scaler: Scaler,
    pub selected: Option<Vec<String>>,
}

impl FeaturePipeline {
    pub fn fit(train: &FeatureTable) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::invalid("cannot fit a feature pipeline on zero rows"));
        }
        let encoders = train
            .names
            .iter()
            .filter(|n| CATEGORICAL_FEATURES.contains(&n.as_str()))
            .map(|n| OneHotEncoder::fit(train, n))
            .collect::<Result<Vec<_>>>()?;
        let encoded = train.encode(&encoders)?;
        Ok(FeaturePipeline {
            input_names: train.names.clone(),
            encoders,
            scaler: Scaler::fit(&encoded),
            selected: None,
        })
    }

    /// Columns produced before selection.
    pub fn encoded_names(&self) -> &[String] {
        &self.scaler.columns
    }

    pub fn output_names(&self) -> Vec<String> {
        self.selected
            .clone()
            .unwrap_or_else(|| self.scaler.columns.clone())
    }

    pub fn with_selection(mut self, names: Vec<String>) -> Result<Self> {
        if let Some(bad) = names.iter().find(|n| !self.scaler.columns.contains(n)) {
            return Err(Error::Schema(format!("selected column {bad:?} is not produced by the pipeline")));
        }
        self.selected = Some(names);
        Ok(self)
    }

    /// Encoded and standardized, before selection.
    pub fn transform_full(&self, table: &FeatureTable) -> Result<FeatureFrame> {
        if table.names != self.input_names {
            return Err(Error::Schema(format!(
                "feature table columns {:?} do not match pipeline input",
                table.names
            )));
        }
        self.scaler.apply(&table.encode(&self.encoders)?)
    }

    pub fn transform(&self, table: &FeatureTable) -> Result<FeatureFrame> {
        let full = self.transform_full(table)?;
        match &self.selected {
            Some(names) => {
                let mut out = full.select(names)?;
                out.scaler = full.scaler;
                Ok(out)
            }
            None => Ok(full),
        }
    }
}

/// Writes `id,verdict,<feature names>`; verdict is empty for unlabeled rows.
pub fn write_feature_csv(path: impl AsRef<Path>, table: &FeatureTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "verdict".to_string()];
    header.extend(table.names.iter().cloned());
    w.write_record(&header)?;
    for (i, row) in table.rows.iter().enumerate() {
        let mut rec = vec![
            table.ids[i].clone(),
            table
                .labels
                .as_ref()
                .map(|l| l[i].to_string())
                .unwrap_or_default(),
        ];
        rec.extend(row.iter().map(|v| match v {
            FeatureValue::Number(x) => format!("{x:?}"),
            FeatureValue::Category(c) => c.clone(),
        }));
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    write_atomic(path, &bytes)
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 || header[0] != "id" || header[1] != "verdict" {
        return Err(Error::Schema(
            "feature CSV must start with `id,verdict` followed by feature columns".into(),
        ));
    }
    let names: Vec<String> = header[2..].to_vec();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut labeled = true;
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        ids.push(rec[0].to_string());
        if rec[1].trim().is_empty() {
            labeled = false;
        } else {
            labels.push(rec[1].parse::<Verdict>().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?);
        }
        let mut row = Vec::with_capacity(names.len());
        for (name, field) in names.iter().zip(rec.iter().skip(2)) {
            if CATEGORICAL_FEATURES.contains(&name.as_str()) {
                row.push(FeatureValue::Category(field.to_string()));
            } else {
                let x: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {name:?}: {field:?} is not a number"),
                })?;
                row.push(FeatureValue::Number(x));
            }
        }
        rows.push(row);
    }
    Ok(FeatureTable {
        names,
        ids,
        rows,
        labels: labeled.then_some(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(col: &[f64]) -> FeatureFrame {
        FeatureFrame::new(vec!["x".into()], col.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn zscore_population_std() {
        let z = frame(&[1.0, 2.0, 3.0]).fit_transform_scaler();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.column(0).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let z = frame(&[5.0, 5.0, 5.0]).fit_transform_scaler();
        assert_eq!(z.column(0), vec![0.0; 3]);
    }

    #[test]
    fn scaler_rejects_other_schema() {
        let s = Scaler::fit(&frame(&[1.0, 2.0]));
        let other = FeatureFrame::new(vec!["y".into()], vec![vec![1.0]]).unwrap();
        assert!(matches!(s.apply(&other), Err(Error::Schema(_))));
    }

    #[test]
    fn frame_rejects_non_finite() {
        assert!(FeatureFrame::new(vec!["x".into()], vec![vec![f64::NAN]]).is_err());
    }

    fn type_table(values: &[&str]) -> FeatureTable {
        FeatureTable {
            names: vec!["tweet_type".into()],
            ids: values.iter().map(|v| v.to_string()).collect(),
            rows: values
                .iter()
                .map(|v| vec![FeatureValue::Category(v.to_string())])
                .collect(),
            labels: None,
        }
    }

    #[test]
    fn one_hot_sorted_categories() {
        let t = type_table(&["tweet", "retweet", "quote", "reply"]);
        let enc = OneHotEncoder::fit(&t, "tweet_type").unwrap();
        assert_eq!(enc.categories, ["quote", "reply", "retweet", "tweet"]);
        let f = t.encode(&[enc.clone()]).unwrap();
        assert_eq!(f.schema[0], "tweet_type=quote");
        assert_eq!(f.row(2), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(enc.encode("promoted"), vec![0.0; 4]);
    }

    #[test]
    fn one_hot_single_category() {
        let t = type_table(&["reply", "reply"]);
        let enc = OneHotEncoder::fit(&t, "tweet_type").unwrap();
        let f = t.encode(&[enc]).unwrap();
        assert_eq!(f.n_cols(), 1);
        assert_eq!(f.column(0), vec![1.0, 1.0]);
    }
}
