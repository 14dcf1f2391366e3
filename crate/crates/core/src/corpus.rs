//! Labeled dataset ingestion, validation, export and seeded splitting.
//!
//! Three on-disk schemas are supported:
//!
//! * `DatasetI`: labeled tweets with tweet-level and user-level metadata.
//! * `DatasetII`: labeled sentences (`id,text,verdict`).
//! * `ConstraintAAAI`: the public shared-task layout (`id,tweet,label`) with
//!   `real`/`fake` labels mapped to informative/misinformative.
//!
//! Files ending in `.jsonl` / `.json` are read as JSON lines, everything else
//! as UTF-8 CSV with a header row.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Binary veracity label. `Misinformative` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Informative,
    Misinformative,
}

impl Verdict {
    pub fn is_positive(self) -> bool {
        self == Verdict::Misinformative
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Verdict::Misinformative
        } else {
            Verdict::Informative
        }
    }

    /// 1.0 for the positive class, 0.0 otherwise.
    pub fn as_f64(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Informative => "Informative",
            Verdict::Misinformative => "Misinformative",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "misinformative" => Ok(Verdict::Misinformative),
            "informative" => Ok(Verdict::Informative),
            other => Err(Error::invalid(format!("unknown verdict label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetType {
    Tweet,
    Retweet,
    Quote,
    Reply,
}

impl TweetType {
    pub fn as_str(self) -> &'static str {
        match self {
            TweetType::Tweet => "tweet",
            TweetType::Retweet => "retweet",
            TweetType::Quote => "quote",
            TweetType::Reply => "reply",
        }
    }
}

impl FromStr for TweetType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tweet" => Ok(TweetType::Tweet),
            "retweet" => Ok(TweetType::Retweet),
            "quote" => Ok(TweetType::Quote),
            "reply" => Ok(TweetType::Reply),
            other => Err(Error::invalid(format!("unknown tweet_type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetMeta {
    /// Epoch milliseconds.
    pub tweet_date: i64,
    pub tweet_type: TweetType,
    pub like_count: u64,
    pub retweet_count: u64,
    pub possibly_sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserMeta {
    /// Epoch milliseconds.
    pub user_created_at: i64,
    pub user_follower_count: u64,
    pub user_following_count: u64,
    pub user_favourites_count: u64,
    pub user_tweet_count: u64,
    pub user_verified: bool,
    pub has_user_url: bool,
    pub user_geo: bool,
    pub user_profile: bool,
}

/// An unlabeled tweet: content plus tweet and user metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub content: String,
    pub tweet_meta: TweetMeta,
    pub user_meta: UserMeta,
}

/// One labeled row of Dataset I.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    #[serde(flatten)]
    pub tweet: Tweet,
    pub verdict: Verdict,
}

/// One labeled sentence (Dataset II, or a Constraint post).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub text: String,
    pub verdict: Verdict,
}

/// Anything that carries a text and a label.
pub trait Labeled {
    fn id(&self) -> &str;
    fn text(&self) -> &str;
    fn verdict(&self) -> Verdict;
}

impl Labeled for TweetRecord {
    fn id(&self) -> &str {
        &self.tweet.id
    }
    fn text(&self) -> &str {
        &self.tweet.content
    }
    fn verdict(&self) -> Verdict {
        self.verdict
    }
}

impl Labeled for SentenceRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn text(&self) -> &str {
        &self.text
    }
    fn verdict(&self) -> Verdict {
        self.verdict
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetSchema {
    DatasetI,
    DatasetII,
    ConstraintAAAI,
}

impl FromStr for DatasetSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dataset1" | "dataseti" | "tweets" => Ok(DatasetSchema::DatasetI),
            "dataset2" | "datasetii" | "sentences" => Ok(DatasetSchema::DatasetII),
            "constraint" | "constraintaaai" => Ok(DatasetSchema::ConstraintAAAI),
            other => Err(Error::invalid(format!("unknown dataset schema {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Tweets(Vec<TweetRecord>),
    Sentences(Vec<SentenceRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Tweets(r) => r.len(),
            Records::Sentences(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(id, text, verdict)` views over either record kind.
    pub fn labeled(&self) -> Vec<(&str, &str, Verdict)> {
        match self {
            Records::Tweets(r) => r.iter().map(|x| (x.id(), x.text(), x.verdict())).collect(),
            Records::Sentences(r) => r.iter().map(|x| (x.id(), x.text(), x.verdict())).collect(),
        }
    }

    pub fn into_tweets(self) -> Result<Vec<TweetRecord>> {
        match self {
            Records::Tweets(r) => Ok(r),
            Records::Sentences(_) => Err(Error::Schema(
                "tweet metadata required, but the dataset holds sentences only".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based physical line number in the source file.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub records: Records,
    pub row_errors: Vec<RowError>,
}

const TWEET_COLUMNS: [&str; 17] = [
    "id",
    "content",
    "verdict",
    "tweet_date",
    "tweet_type",
    "like_count",
    "retweet_count",
    "possibly_sensitive",
    "user_created_at",
    "user_follower_count",
    "user_following_count",
    "user_favourites_count",
    "user_tweet_count",
    "user_verified",
    "has_user_url",
    "user_geo",
    "user_profile",
];

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("json") | Some("ndjson")
    )
}

pub fn load_dataset(path: impl AsRef<Path>, schema: DatasetSchema) -> Result<LoadedDataset> {
    let path = path.as_ref();
    if is_jsonl(path) {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        load_jsonl(BufReader::new(file), schema)
    } else {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        load_csv(&bytes[..], schema)
    }
}

/// Parses CSV content with a header row.
pub fn load_csv<R: std::io::Read>(reader: R, schema: DatasetSchema) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let required: &[&str] = match schema {
        DatasetSchema::DatasetI => &TWEET_COLUMNS,
        DatasetSchema::DatasetII => &["id", "text", "verdict"],
        DatasetSchema::ConstraintAAAI => &["id", "tweet", "label"],
    };
    let mut index = Vec::with_capacity(required.len());
    for col in required {
        let pos = header
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(col))
            .ok_or_else(|| Error::Schema(format!("missing required column {col:?}")))?;
        index.push(pos);
    }

    let mut tweets = Vec::new();
    let mut sentences = Vec::new();
    let mut row_errors = Vec::new();
    for result in rdr.records() {
        let row = match result {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                row_errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| row.get(index[i]).unwrap_or("");
        let parsed = match schema {
            DatasetSchema::DatasetI => {
                let mut obj = Map::new();
                let mut tweet_meta = Map::new();
                let mut user_meta = Map::new();
                for (i, col) in TWEET_COLUMNS.iter().enumerate() {
                    let raw = field(i).to_string();
                    let slot = match i {
                        0..=2 => &mut obj,
                        3..=7 => &mut tweet_meta,
                        _ => &mut user_meta,
                    };
                    slot.insert((*col).to_string(), Value::String(raw));
                }
                obj.insert("tweet_meta".into(), Value::Object(tweet_meta));
                obj.insert("user_meta".into(), Value::Object(user_meta));
                tweet_record_from_json(&Value::Object(obj)).map(|r| tweets.push(r))
            }
            DatasetSchema::DatasetII => {
                sentence_record(field(0), field(1), field(2).parse()).map(|r| sentences.push(r))
            }
            DatasetSchema::ConstraintAAAI => {
                sentence_record(field(0), field(1), constraint_label(field(2)))
                    .map(|r| sentences.push(r))
            }
        };
        if let Err(fields) = parsed {
            row_errors.push(RowError {
                line,
                message: fields.join("; "),
            });
        }
    }
    let records = match schema {
        DatasetSchema::DatasetI => Records::Tweets(tweets),
        _ => Records::Sentences(sentences),
    };
    Ok(LoadedDataset {
        records,
        row_errors,
    })
}

pub fn load_jsonl<R: BufRead>(reader: R, schema: DatasetSchema) -> Result<LoadedDataset> {
    let mut tweets = Vec::new();
    let mut sentences = Vec::new();
    let mut row_errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                row_errors.push(RowError {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let parsed = match schema {
            DatasetSchema::DatasetI => tweet_record_from_json(&value).map(|r| tweets.push(r)),
            DatasetSchema::DatasetII => sentence_record(
                json_str(&value, "id"),
                json_str(&value, "text"),
                json_str(&value, "verdict").parse(),
            )
            .map(|r| sentences.push(r)),
            DatasetSchema::ConstraintAAAI => sentence_record(
                &json_id(&value),
                json_str(&value, "tweet"),
                constraint_label(json_str(&value, "label")),
            )
            .map(|r| sentences.push(r)),
        };
        if let Err(fields) = parsed {
            row_errors.push(RowError {
                line: line_no,
                message: fields.join("; "),
            });
        }
    }
    let records = match schema {
        DatasetSchema::DatasetI => Records::Tweets(tweets),
        _ => Records::Sentences(sentences),
    };
    Ok(LoadedDataset {
        records,
        row_errors,
    })
}

fn json_str<'a>(v: &'a Value, key: &str) -> &'a str {
    v.get(key).and_then(Value::as_str).unwrap_or("")
}

fn json_id(v: &Value) -> String {
    match v.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => String::new(),
    }
}

fn constraint_label(raw: &str) -> Result<Verdict> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "real" => Ok(Verdict::Informative),
        "fake" => Ok(Verdict::Misinformative),
        other => Err(Error::invalid(format!("unknown label {other:?}"))),
    }
}

fn sentence_record(
    id: &str,
    text: &str,
    verdict: Result<Verdict>,
) -> std::result::Result<SentenceRecord, Vec<String>> {
    let mut errors = Vec::new();
    if text.trim().is_empty() {
        errors.push("text: empty".to_string());
    }
    let verdict = verdict.map_err(|e| errors.push(format!("verdict: {e}"))).ok();
    match verdict {
        Some(verdict) if errors.is_empty() => Ok(SentenceRecord {
            id: id.to_string(),
            text: text.to_string(),
            verdict,
        }),
        _ => Err(errors),
    }
}

/// Collects validation errors per offending field instead of stopping at the first.
struct FieldCollector<'a> {
    errors: Vec<String>,
    prefix: &'a str,
}

impl FieldCollector<'_> {
    fn fail(&mut self, key: &str, msg: impl fmt::Display) {
        if self.prefix.is_empty() {
            self.errors.push(format!("{key}: {msg}"));
        } else {
            self.errors.push(format!("{}.{key}: {msg}", self.prefix));
        }
    }

    fn count(&mut self, obj: &Map<String, Value>, key: &str) -> u64 {
        match obj.get(key) {
            Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64().unwrap_or(0),
            Some(Value::Number(n)) if n.as_f64().is_some_and(|f| f >= 0.0 && f.fract() == 0.0) => {
                n.as_f64().unwrap_or(0.0) as u64
            }
            Some(Value::String(s)) => match s.trim().parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    self.fail(key, format!("expected a non-negative count, got {s:?}"));
                    0
                }
            },
            Some(other) => {
                self.fail(key, format!("expected a non-negative count, got {other}"));
                0
            }
            None => {
                self.fail(key, "missing");
                0
            }
        }
    }

    fn date(&mut self, obj: &Map<String, Value>, key: &str) -> i64 {
        let v = match obj.get(key) {
            Some(Value::Number(n)) => n.as_i64(),
            Some(Value::String(s)) => s.trim().parse::<i64>().ok(),
            Some(_) => None,
            None => {
                self.fail(key, "missing");
                return 0;
            }
        };
        match v {
            Some(v) if v > 0 => v,
            _ => {
                self.fail(key, "expected a positive epoch-millisecond timestamp");
                0
            }
        }
    }

    fn flag(&mut self, obj: &Map<String, Value>, key: &str) -> bool {
        match obj.get(key) {
            Some(Value::Bool(b)) => *b,
            Some(Value::Number(n)) if n.as_u64() == Some(0) => false,
            Some(Value::Number(n)) if n.as_u64() == Some(1) => true,
            Some(Value::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    self.fail(key, format!("expected a boolean, got {s:?}"));
                    false
                }
            },
            Some(other) => {
                self.fail(key, format!("expected a boolean, got {other}"));
                false
            }
            None => {
                self.fail(key, "missing");
                false
            }
        }
    }
}

/// Validates an unlabeled tweet object, reporting every offending field.
pub fn tweet_from_json(value: &Value) -> std::result::Result<Tweet, Vec<String>> {
    let mut top = FieldCollector {
        errors: Vec::new(),
        prefix: "",
    };
    let Some(obj) = value.as_object() else {
        return Err(vec!["record: expected a JSON object".into()]);
    };
    let id = json_id(value);
    let content = json_str(value, "content").to_string();
    if content.trim().is_empty() {
        top.fail("content", "must be non-empty");
    }

    let mut tweet_meta = None;
    match obj.get("tweet_meta").and_then(Value::as_object) {
        Some(m) => {
            let mut c = FieldCollector {
                errors: Vec::new(),
                prefix: "tweet_meta",
            };
            let tweet_date = c.date(m, "tweet_date");
            let tweet_type = match m.get("tweet_type").and_then(Value::as_str) {
                Some(s) => s.parse().map_err(|e| c.fail("tweet_type", e)).ok(),
                None => {
                    c.fail("tweet_type", "missing");
                    None
                }
            };
            let like_count = c.count(m, "like_count");
            let retweet_count = c.count(m, "retweet_count");
            let possibly_sensitive = c.flag(m, "possibly_sensitive");
            if c.errors.is_empty() {
                tweet_meta = tweet_type.map(|tweet_type| TweetMeta {
                    tweet_date,
                    tweet_type,
                    like_count,
                    retweet_count,
                    possibly_sensitive,
                });
            }
            top.errors.extend(c.errors);
        }
        None => top.fail("tweet_meta", "missing"),
    }

    let mut user_meta = None;
    match obj.get("user_meta").and_then(Value::as_object) {
        Some(m) => {
            let mut c = FieldCollector {
                errors: Vec::new(),
                prefix: "user_meta",
            };
            let meta = UserMeta {
                user_created_at: c.date(m, "user_created_at"),
                user_follower_count: c.count(m, "user_follower_count"),
                user_following_count: c.count(m, "user_following_count"),
                user_favourites_count: c.count(m, "user_favourites_count"),
                user_tweet_count: c.count(m, "user_tweet_count"),
                user_verified: c.flag(m, "user_verified"),
                has_user_url: c.flag(m, "has_user_url"),
                user_geo: c.flag(m, "user_geo"),
                user_profile: c.flag(m, "user_profile"),
            };
            if c.errors.is_empty() {
                user_meta = Some(meta);
            }
            top.errors.extend(c.errors);
        }
        None => top.fail("user_meta", "missing"),
    }

    match (tweet_meta, user_meta) {
        (Some(tweet_meta), Some(user_meta)) if top.errors.is_empty() => Ok(Tweet {
            id,
            content,
            tweet_meta,
            user_meta,
        }),
        _ => Err(top.errors),
    }
}

/// Validates a labeled tweet object (the JSON-lines row layout).
pub fn tweet_record_from_json(value: &Value) -> std::result::Result<TweetRecord, Vec<String>> {
    let verdict = json_str(value, "verdict").parse::<Verdict>();
    match (tweet_from_json(value), verdict) {
        (Ok(tweet), Ok(verdict)) => Ok(TweetRecord { tweet, verdict }),
        (tweet, verdict) => {
            let mut errors = tweet.err().unwrap_or_default();
            if let Err(e) = verdict {
                errors.push(format!("verdict: {e}"));
            }
            Err(errors)
        }
    }
}

/// Writes records as CSV or JSON lines (chosen by extension).
pub fn write_dataset(path: impl AsRef<Path>, records: &Records) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    if is_jsonl(path) {
        match records {
            Records::Tweets(rows) => {
                for r in rows {
                    serde_json::to_writer(&mut buf, r)?;
                    buf.push(b'\n');
                }
            }
            Records::Sentences(rows) => {
                for r in rows {
                    serde_json::to_writer(&mut buf, r)?;
                    buf.push(b'\n');
                }
            }
        }
    } else {
        let mut w = csv::Writer::from_writer(&mut buf);
        match records {
            Records::Tweets(rows) => {
                w.write_record(TWEET_COLUMNS)?;
                for r in rows {
                    let t = &r.tweet;
                    let m = &t.tweet_meta;
                    let u = &t.user_meta;
                    w.write_record([
                        t.id.clone(),
                        t.content.clone(),
                        r.verdict.to_string(),
                        m.tweet_date.to_string(),
                        m.tweet_type.as_str().to_string(),
                        m.like_count.to_string(),
                        m.retweet_count.to_string(),
                        m.possibly_sensitive.to_string(),
                        u.user_created_at.to_string(),
                        u.user_follower_count.to_string(),
                        u.user_following_count.to_string(),
                        u.user_favourites_count.to_string(),
                        u.user_tweet_count.to_string(),
                        u.user_verified.to_string(),
                        u.has_user_url.to_string(),
                        u.user_geo.to_string(),
                        u.user_profile.to_string(),
                    ])?;
                }
            }
            Records::Sentences(rows) => {
                w.write_record(["id", "text", "verdict"])?;
                for r in rows {
                    w.write_record([r.id.as_str(), r.text.as_str(), r.verdict.as_str()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        drop(w);
    }
    write_atomic(path, &buf)
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train_fraction: train,
            val_fraction: val,
            test_fraction: test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 60/20/20.
    pub fn standard(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.val_fraction, self.test_fraction];
        if f.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::invalid("split fractions must be positive"));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split fractions must sum to 1"));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes: val and test are floored, train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor = |frac: f64| ((n as f64) * frac + 1e-9).floor() as usize;
        let val = floor(self.val_fraction);
        let test = floor(self.test_fraction);
        (n - val - test, val, test)
    }
}

/// Seeded shuffle-then-slice partition.
pub fn split<T: Clone>(records: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    spec.validate()?;
    if records.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let order = shuffled_indices(records.len(), spec.seed);
    let (n_train, n_val, _) = spec.sizes(records.len());
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok((
        pick(&order[..n_train]),
        pick(&order[n_train..n_train + n_val]),
        pick(&order[n_train + n_val..]),
    ))
}

pub(crate) fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order
}
