//! Writes the synthetic sample corpora and embedding table under `data/`.
//!
//! ```text
//! cargo run -p infodemic-core --example gen_sample_data -- data
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use infodemic_core::corpus::{write_atomic, Verdict};
use infodemic_core::textprep::{preprocess, PrepConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20200311;
const DIM: usize = 8;

const MISINFO: &[&str] = &[
    "miracle", "cure", "bleach", "hoax", "microchip", "garlic", "conspiracy", "secret", "poison",
    "plandemic", "towers", "hidden", "lies", "toxic", "banned", "exposed", "scam", "silenced",
];
const INFO: &[&str] = &[
    "vaccine", "trial", "study", "researchers", "hospital", "guidelines", "masks", "data",
    "testing", "clinical", "dexamethasone", "patients", "evidence", "results", "distancing",
    "officials", "recommend", "published",
];
const SHARED: &[&str] = &[
    "covid", "coronavirus", "people", "health", "virus", "today", "news", "world", "pandemic",
    "week", "country", "new", "cases", "doctors", "spread", "report",
];
const OPENERS_M: &[&str] = &["BREAKING", "Share before they delete this", "Wake up", "They dont want you to know"];
const OPENERS_I: &[&str] = &["Update", "New report", "WHO says", "Health officials confirm"];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().unwrap_or("")
}

fn sentence(rng: &mut ChaCha8Rng, topic: &[&str], other: &[&str]) -> String {
    let n = rng.gen_range(5..10);
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        let r: f64 = rng.gen();
        let w = if r < 0.45 {
            pick(rng, topic)
        } else if r < 0.55 {
            pick(rng, other)
        } else {
            pick(rng, SHARED)
        };
        words.push(w.to_string());
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push(if rng.gen_bool(0.3) { '!' } else { '.' });
    s
}

struct Row {
    id: String,
    content: String,
    verdict: Verdict,
    fields: Vec<String>,
}

fn tweet(rng: &mut ChaCha8Rng, i: usize) -> Row {
    let mis = rng.gen_bool(0.5);
    let (topic, other, openers) = if mis { (MISINFO, INFO, OPENERS_M) } else { (INFO, MISINFO, OPENERS_I) };
    let mut content = String::new();
    if rng.gen_bool(0.5) {
        content.push_str(pick(rng, openers));
        content.push_str(": ");
    }
    let n_sent = rng.gen_range(1..4);
    let parts: Vec<String> = (0..n_sent).map(|_| sentence(rng, topic, other)).collect();
    content.push_str(&parts.join(" "));
    if mis && rng.gen_bool(0.3) {
        content = content.to_uppercase();
    }
    if rng.gen_bool(if mis { 0.3 } else { 0.5 }) {
        let tag = pick(rng, &["COVID19", "coronavirus", "health", "truth"]);
        let _ = write!(content, " #{tag}");
    }
    if rng.gen_bool(0.3) {
        let who = if mis { pick(rng, &["freedomvoice", "truthseeker99"]) } else { pick(rng, &["WHO", "CDCgov", "NIH"]) };
        let _ = write!(content, " @{who}");
    }
    if rng.gen_bool(if mis { 0.2 } else { 0.6 }) {
        let _ = write!(content, " https://t.co/{:08x}", rng.gen::<u32>());
    }
    // A few labels disagree with the generating topic.
    let verdict = Verdict::from_positive(if rng.gen_bool(0.08) { !mis } else { mis });
    let date = 1_583_020_800_000i64 + rng.gen_range(0..120) * 86_400_000;
    let created = 1_230_768_000_000i64 + rng.gen_range(0..4000) * 86_400_000;
    let followers: u64 = if mis { rng.gen_range(0..3000) } else { rng.gen_range(200..200_000) };
    let tweet_type = pick(rng, &["tweet", "tweet", "retweet", "quote", "reply"]);
    let fields = vec![
        date.to_string(),
        tweet_type.to_string(),
        rng.gen_range(0..500u64).to_string(),
        rng.gen_range(0..200u64).to_string(),
        rng.gen_bool(if mis { 0.2 } else { 0.05 }).to_string(),
        created.to_string(),
        followers.to_string(),
        rng.gen_range(10..5000u64).to_string(),
        rng.gen_range(0..20_000u64).to_string(),
        rng.gen_range(10..50_000u64).to_string(),
        rng.gen_bool(if mis { 0.05 } else { 0.6 }).to_string(),
        rng.gen_bool(0.5).to_string(),
        rng.gen_bool(0.3).to_string(),
        rng.gen_bool(0.8).to_string(),
    ];
    Row { id: format!("t{i:04}"), content, verdict, fields }
}

const HEADER: [&str; 17] = [
    "id", "content", "verdict", "tweet_date", "tweet_type", "like_count", "retweet_count",
    "possibly_sensitive", "user_created_at", "user_follower_count", "user_following_count",
    "user_favourites_count", "user_tweet_count", "user_verified", "has_user_url", "user_geo",
    "user_profile",
];

fn write_tweets(path: &Path, rows: &[Row]) {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).unwrap();
    for r in rows {
        let mut rec = vec![r.id.clone(), r.content.clone(), r.verdict.to_string()];
        rec.extend(r.fields.iter().cloned());
        w.write_record(&rec).unwrap();
    }
    write_atomic(path, &w.into_inner().unwrap()).unwrap();
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let rows: Vec<Row> = (0..200).map(|i| tweet(&mut rng, i)).collect();
    write_tweets(&dir.join("dataset1.csv"), &rows);
    write_tweets(&dir.join("sample50.csv"), &rows[..50]);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "text", "verdict"]).unwrap();
    for r in &rows {
        for (k, s) in infodemic_core::textprep::split_sentences(&r.content).iter().enumerate() {
            w.write_record([format!("{}-s{k}", r.id), s.clone(), r.verdict.to_string()]).unwrap();
        }
    }
    write_atomic(dir.join("dataset2.csv"), &w.into_inner().unwrap()).unwrap();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "tweet", "label"]).unwrap();
    for (i, r) in rows.iter().take(60).enumerate() {
        let label = if r.verdict.is_positive() { "fake" } else { "real" };
        w.write_record([(i + 1).to_string(), r.content.clone(), label.to_string()]).unwrap();
    }
    write_atomic(dir.join("constraint_sample.csv"), &w.into_inner().unwrap()).unwrap();

    // Embeddings are keyed by preprocessed (stemmed) tokens.
    let prep = PrepConfig::default();
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut add = |words: &[&str], axis: Option<usize>, rng: &mut ChaCha8Rng| {
        for w in words {
            for tok in preprocess(w, &prep).split_whitespace() {
                vectors.entry(tok.to_string()).or_insert_with(|| {
                    let mut v: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-0.3..0.3)).collect();
                    if let Some(a) = axis {
                        v[a] += 1.0;
                    }
                    v
                });
            }
        }
    };
    add(MISINFO, Some(0), &mut rng);
    add(INFO, Some(1), &mut rng);
    add(SHARED, None, &mut rng);
    let mut text = format!("{} {DIM}\n", vectors.len());
    for (word, v) in &vectors {
        let nums: Vec<String> = v.iter().map(|x| format!("{x:.5}")).collect();
        let _ = writeln!(text, "{word} {}", nums.join(" "));
    }
    write_atomic(dir.join("embeddings.vec"), text.as_bytes()).unwrap();
    eprintln!("wrote sample data to {}", dir.display());
}
