//! Confusion matrices, binary metrics with Misinformative as the positive
//! class, and report emission.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Verdict;
use crate::error::{Error, Result};

/// Report JSON schema shipped with the crate.
pub const REPORT_SCHEMA: &str = include_str!("../assets/report.schema.json");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroDivision {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub dataset: String,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub zero_division: ZeroDivision,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

/// F1 from precision and recall; 0 when both are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let n = (tp + fp + tn + fn_) as f64;
        let accuracy = if n == 0.0 { 0.0 } else { (tp + tn) as f64 / n };
        let (precision, zp) = ratio(tp as f64, (tp + fp) as f64);
        let (recall, zr) = ratio(tp as f64, (tp + fn_) as f64);
        let zf = precision + recall == 0.0;
        EvalReport {
            model: String::new(),
            dataset: String::new(),
            tp,
            fp,
            tn,
            fn_,
            accuracy,
            precision,
            recall,
            f1: f1_from(precision, recall),
            zero_division: ZeroDivision {
                precision: zp,
                recall: zr,
                f1: zf,
            },
        }
    }

    pub fn tagged(mut self, model: impl Into<String>, dataset: impl Into<String>) -> Self {
        self.model = model.into();
        self.dataset = dataset.into();
        self
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn score(y_true: &[Verdict], y_pred: &[Verdict]) -> Result<EvalReport> {
    let t: Vec<bool> = y_true.iter().map(|v| v.is_positive()).collect();
    let p: Vec<bool> = y_pred.iter().map(|v| v.is_positive()).collect();
    score_bool(&t, &p)
}

pub fn score_bool(y_true: &[bool], y_pred: &[bool]) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::invalid("cannot score an empty prediction set"));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, tn, fn_))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    TableText,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table-text" | "table" | "text" => Ok(ReportFormat::TableText),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "model", "dataset", "accuracy", "precision", "recall", "f1", "tp", "fp", "tn", "fn",
];

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: &'a str,
    dataset: &'a str,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    tp: usize,
    fp: usize,
    tn: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    zero_division: ZeroDivision,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    positive_class: &'static str,
    reports: Vec<JsonRow<'a>>,
}

/// One row per report, metrics at four decimals.
pub fn emit_report(reports: &[EvalReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::invalid("no reports to emit"));
    }
    Ok(match format {
        ReportFormat::TableText => {
            let w = reports
                .iter()
                .map(|r| r.model.chars().count())
                .max()
                .unwrap_or(0)
                .max("Model".len());
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<w$}  {:>8}  {:>9}  {:>6}  {:>6}  {:>5}  {:>5}",
                "Model", "Accuracy", "Precision", "Recall", "F1", "FN", "FP"
            );
            for r in reports {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:>8.4}  {:>9.4}  {:>6.4}  {:>6.4}  {:>5}  {:>5}",
                    r.model, r.accuracy, r.precision, r.recall, r.f1, r.fn_, r.fp
                );
            }
            out
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in reports {
                w.write_record([
                    r.model.clone(),
                    r.dataset.clone(),
                    format!("{:.4}", r.accuracy),
                    format!("{:.4}", r.precision),
                    format!("{:.4}", r.recall),
                    format!("{:.4}", r.f1),
                    r.tp.to_string(),
                    r.fp.to_string(),
                    r.tn.to_string(),
                    r.fn_.to_string(),
                ])?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
            String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))?
        }
        ReportFormat::Json => {
            let doc = JsonDoc {
                positive_class: "misinformative",
                reports: reports
                    .iter()
                    .map(|r| JsonRow {
                        model: &r.model,
                        dataset: &r.dataset,
                        accuracy: round4(r.accuracy),
                        precision: round4(r.precision),
                        recall: round4(r.recall),
                        f1: round4(r.f1),
                        tp: r.tp,
                        fp: r.fp,
                        tn: r.tn,
                        fn_: r.fn_,
                        zero_division: r.zero_division,
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    })
}

/// Parses a CSV report; metrics come back at the written precision.
pub fn load_report_csv<R: std::io::Read>(reader: R) -> Result<Vec<EvalReport>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Schema(format!("unexpected report header {header:?}")));
    }
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("{}: {:?}", CSV_HEADER[i], &rec[i]),
            })
        };
        let count = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("{}: {:?}", CSV_HEADER[i], &rec[i]),
            })
        };
        let (tp, fp, tn, fn_) = (count(6)?, count(7)?, count(8)?, count(9)?);
        let counts = EvalReport::from_counts(tp, fp, tn, fn_);
        out.push(EvalReport {
            model: rec[0].to_string(),
            dataset: rec[1].to_string(),
            accuracy: num(2)?,
            precision: num(3)?,
            recall: num(4)?,
            f1: num(5)?,
            ..counts
        });
    }
    Ok(out)
}

pub fn write_report(path: impl AsRef<Path>, reports: &[EvalReport], format: ReportFormat) -> Result<()> {
    crate::corpus::write_atomic(path, emit_report(reports, format)?.as_bytes())
}
