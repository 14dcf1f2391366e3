use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use infodemic_core::corpus::{load_dataset, DatasetSchema, Labeled};
use infodemic_core::features::{FeaturePipeline, FeatureTable, Lexicons};
use infodemic_core::learn::{Binding, Matrix, ModelConfig, ModelKind, TrainedModel};
use infodemic_core::textprep::{preprocess, PrepConfig};
use infodemic_core::vectorize::TfidfModel;
use infodemic_service::{router, AppState, ModelEntry, ServiceManifest, SimilarityEntry};
use serde_json::{json, Value};
use tower::ServiceExt;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

struct Fixture {
    _dir: tempfile::TempDir,
    log: PathBuf,
    app: Router,
}

fn train_models(dir: &Path) -> Vec<ModelEntry> {
    let records = load_dataset(data_dir().join("sample50.csv"), DatasetSchema::DatasetI)
        .unwrap()
        .records
        .into_tweets()
        .unwrap();
    let y: Vec<bool> = records.iter().map(|r| r.verdict.is_positive()).collect();
    let prep = PrepConfig::default();
    let docs: Vec<String> = records.iter().map(|r| preprocess(r.text(), &prep)).collect();
    let tfidf = TfidfModel::fit(&docs).unwrap();
    let x = tfidf.transform_many(&docs);
    let mut entries = Vec::new();
    for kind in [ModelKind::Nb, ModelKind::Lr] {
        let cfg = ModelConfig::default_for(kind).for_text();
        let binding = Binding::Text { prep: prep.clone(), tfidf: tfidf.clone() };
        let m = TrainedModel::train(&cfg, &x, &y, 1, None, binding).unwrap();
        let path = dir.join(format!("content-{kind}.json"));
        m.save(&path).unwrap();
        entries.push(ModelEntry { tag: format!("content-{kind}"), path });
    }
    let table = FeatureTable::from_records(&records, &Lexicons::default());
    let pipeline = FeaturePipeline::fit(&table).unwrap();
    let f = pipeline.transform(&table).unwrap();
    let xf = Matrix::from_flat(f.n_cols(), f.data().to_vec()).unwrap();
    let m = TrainedModel::train(
        &ModelConfig::default_for(ModelKind::Lr),
        &xf,
        &y,
        1,
        None,
        Binding::Features { pipeline },
    )
    .unwrap();
    let path = dir.join("network-lr.json");
    m.save(&path).unwrap();
    entries.push(ModelEntry { tag: "network-lr".into(), path });
    entries
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let models = train_models(dir.path());
    let log = dir.path().join("logs/feedback.jsonl");
    let manifest = ServiceManifest {
        port: 0,
        feedback_log: log.clone(),
        datasets_dir: Some(data_dir()),
        lexicon_dir: None,
        sentence_model: Some("content-nb".into()),
        network_model: Some("network-lr".into()),
        content_model: Some("content-lr".into()),
        models,
        similarity: Some(SimilarityEntry {
            embeddings: data_dir().join("embeddings.vec"),
            index: data_dir().join("sample50.csv"),
            schema: "dataset1".into(),
            metric: "cosine".into(),
            k: 5,
        }),
    };
    let app = router(Arc::new(AppState::from_manifest(&manifest).unwrap()));
    Fixture { _dir: dir, log, app }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, v)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

fn strip_volatile(mut v: Value) -> Value {
    let o = v.as_object_mut().unwrap();
    o.remove("check_id");
    o.remove("created_at");
    v
}

fn sample_tweet() -> Value {
    json!({
        "id": "q1",
        "content": "BREAKING: garlic cure exposed, the WHO lies! https://t.co/abc",
        "tweet_meta": {
            "tweet_date": 1588000000000i64, "tweet_type": "tweet", "like_count": 3,
            "retweet_count": 1, "possibly_sensitive": false
        },
        "user_meta": {
            "user_created_at": 1400000000000i64, "user_follower_count": 12,
            "user_following_count": 40, "user_favourites_count": 9, "user_tweet_count": 100,
            "user_verified": false, "has_user_url": false, "user_geo": false, "user_profile": true
        }
    })
}

#[tokio::test]
async fn paragraph_check_with_tags() {
    let f = fixture();
    let (s, v) = post(&f.app, "/check/paragraph", json!({"text": "Miracle garlic cure exposed", "model_tags": ["content-nb"]})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 1);
    let p = v["verdicts"][0]["probability"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));

    let (_, v) = post(&f.app, "/check/paragraph", json!({"text": "Vaccine trial results", "model_tags": ["content-lr", "content-nb"]})).await;
    let tags: Vec<&str> = v["verdicts"].as_array().unwrap().iter().map(|x| x["model"].as_str().unwrap()).collect();
    assert_eq!(tags, ["content-lr", "content-nb"]);

    let (s, v) = post(&f.app, "/check/paragraph", json!({"text": "x", "model_tags": ["content-nb", "xyz"]})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_model");
    assert!(v.get("verdicts").is_none());

    let (s, v) = post(&f.app, "/check/paragraph", json!({"text": "   "})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "validation_error");

    let (s, v) = post(&f.app, "/check/paragraph", json!({"text": "x", "model_tags": ["network-lr"]})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "model_mismatch");
}

#[tokio::test]
async fn malformed_json_is_bad_request() {
    let f = fixture();
    let req = Request::post("/check/paragraph").body(Body::from("{not json")).unwrap();
    let resp = f.app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sentence_breakdown() {
    let f = fixture();
    let text = "Garlic cures the virus. Hospital study published results!";
    let (s, v) = post(&f.app, "/check/sentences", json!({"text": text})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let sents = v["sentences"].as_array().unwrap();
    assert_eq!(sents.len(), 2);
    for sv in sents {
        let span = sv["span"].as_array().unwrap();
        let (a, b) = (span[0].as_u64().unwrap() as usize, span[1].as_u64().unwrap() as usize);
        assert_eq!(&text[a..b], sv["text"].as_str().unwrap());
    }

    let (_, v) = post(&f.app, "/check/sentences", json!({"text": "Masks reduce spread.", "model_tag": "content-lr"})).await;
    let sents = v["sentences"].as_array().unwrap();
    assert_eq!(sents.len(), 1);
    assert_eq!(sents[0]["verdict"], v["verdicts"][0]["verdict"]);
    assert_eq!(sents[0]["probability"], v["verdicts"][0]["probability"]);

    let (s, _) = post(&f.app, "/check/sentences", json!({"text": ""})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn tweet_check_returns_two_groups_deterministically() {
    let f = fixture();
    let (s, a) = post(&f.app, "/check/tweet", sample_tweet()).await;
    assert_eq!(s, StatusCode::OK, "{a}");
    let groups = a["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    assert_eq!(groups[0]["group"], "network");
    assert_eq!(groups[1]["group"], "content");
    let (_, b) = post(&f.app, "/check/tweet", sample_tweet()).await;
    assert_ne!(a["check_id"], b["check_id"]);
    assert_eq!(strip_volatile(a), strip_volatile(b));

    let mut bad = sample_tweet();
    bad.as_object_mut().unwrap().remove("user_meta");
    bad["tweet_meta"]["like_count"] = json!(-4);
    let (s, v) = post(&f.app, "/check/tweet", bad).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let fields: Vec<String> = v["error"]["fields"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    assert!(fields.iter().any(|x| x.starts_with("user_meta")), "{fields:?}");
    assert!(fields.iter().any(|x| x.starts_with("tweet_meta.like_count")), "{fields:?}");
}

#[tokio::test]
async fn similar_defaults_and_validation() {
    let f = fixture();
    let (s, v) = post(&f.app, "/similar", json!({"text": "garlic bleach miracle cure"})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["similarity"]["k"], 5);
    let n = v["neighbors"].as_array().unwrap();
    assert_eq!(n.len(), 5);
    let sims: Vec<f64> = n.iter().map(|x| x["similarity"].as_f64().unwrap()).collect();
    assert!(sims.windows(2).all(|w| w[0] >= w[1]));
    assert!(n.iter().all(|x| x["text"].is_string()));
    let score = v["similarity"]["score"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&score));

    let (s, v) = post(&f.app, "/similar", json!({"text": "garlic", "k": 0})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["fields"][0], "k");
    let (s, _) = post(&f.app, "/similar", json!({"text": "garlic", "k": 51})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, v) = post(&f.app, "/similar", json!({"text": "garlic", "metric": "euclidean", "k": 3})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["neighbors"].as_array().unwrap().len(), 3);
    let (s, _) = post(&f.app, "/similar", json!({"text": "garlic", "metric": "manhattan"})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn similar_with_empty_index_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "id,text,verdict\n").unwrap();
    let manifest = ServiceManifest {
        port: 0,
        feedback_log: dir.path().join("fb.jsonl"),
        datasets_dir: None,
        lexicon_dir: None,
        sentence_model: None,
        network_model: None,
        content_model: None,
        models: vec![],
        similarity: Some(SimilarityEntry {
            embeddings: data_dir().join("embeddings.vec"),
            index: empty,
            schema: "dataset2".into(),
            metric: "cosine".into(),
            k: 5,
        }),
    };
    let app = router(Arc::new(AppState::from_manifest(&manifest).unwrap()));
    let (s, v) = post(&app, "/similar", json!({"text": "garlic"})).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(v["error"]["code"], "unavailable");
    let (_, v) = call(&app, Method::GET, "/datasets", None).await;
    assert_eq!(v["datasets"], json!([]));
}

#[tokio::test]
async fn feedback_is_append_only_and_last_write_wins() {
    let f = fixture();
    let (_, check) = post(&f.app, "/check/paragraph", json!({"text": "garlic cure"})).await;
    let id = check["check_id"].as_str().unwrap().to_string();
    let len = || std::fs::read(&f.log).unwrap_or_default();

    let before = len();
    let (s, v) = post(&f.app, "/feedback", json!({"check_id": "nope", "vote": "like"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_check");
    assert_eq!(len(), before);

    let (s, v) = post(&f.app, "/feedback", json!({"check_id": id, "vote": "like"})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["votes"], 1);
    let after_one = len();
    assert_eq!(after_one.iter().filter(|&&b| b == b'\n').count(), 1);

    let (_, v) = post(&f.app, "/feedback", json!({"check_id": id, "vote": "dislike"})).await;
    assert_eq!(v["votes"], 2);
    let after_two = len();
    assert!(after_two.starts_with(&after_one));
    let lines: Vec<Value> = String::from_utf8(after_two)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["vote"], "dislike");
    assert!(lines[0]["timestamp"].is_string());

    let (_, v) = call(&f.app, Method::GET, &format!("/feedback/{id}"), None).await;
    assert_eq!(v["vote"], "dislike");

    let (s, _) = post(&f.app, "/feedback", json!({"check_id": id, "vote": "meh"})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn check_endpoints_do_not_touch_the_log() {
    let f = fixture();
    post(&f.app, "/check/paragraph", json!({"text": "garlic"})).await;
    post(&f.app, "/similar", json!({"text": "garlic"})).await;
    assert_eq!(std::fs::metadata(&f.log).unwrap().len(), 0);
}

#[tokio::test]
async fn listings_and_downloads() {
    let f = fixture();
    let (s, v) = call(&f.app, Method::GET, "/models", None).await;
    assert_eq!(s, StatusCode::OK);
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 3);
    assert_eq!(models[2]["input"], "features");
    assert_eq!(v["similarity"]["index_size"], 50);

    let (_, v) = call(&f.app, Method::GET, "/datasets", None).await;
    let names: Vec<&str> = v["datasets"].as_array().unwrap().iter().map(|d| d["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"dataset1.csv"));
    let (s, body) = call(&f.app, Method::GET, "/datasets/sample50.csv", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(body.as_str().unwrap().starts_with("id,content,verdict"));
    let (s, _) = call(&f.app, Method::GET, "/datasets/..%2FCargo.toml", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, v) = call(&f.app, Method::GET, "/nowhere", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "not_found");
}

#[tokio::test]
async fn concurrent_checks_agree() {
    let f = fixture();
    let mut handles = Vec::new();
    for _ in 0..8 {
        let app = f.app.clone();
        handles.push(tokio::spawn(async move {
            strip_volatile(post(&app, "/check/paragraph", json!({"text": "masks and vaccine trial"})).await.1)
        }));
    }
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    assert!(out.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn manifest_rejects_unknown_role_model() {
    let m = ServiceManifest::parse(
        r#"
        feedback_log = "fb.jsonl"
        network_model = "missing"
        "#,
    )
    .unwrap();
    assert!(AppState::from_manifest(&m).is_err());
}
