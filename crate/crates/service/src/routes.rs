use axum::body::{Body, Bytes};
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use infodemic_core::corpus::{tweet_from_json, Verdict};
use infodemic_core::features::{extract_features, FeatureTable};
use infodemic_core::simclass::{classify_vector, Metric, Neighbor, SimilarityConfig, TieRule};
use infodemic_core::textprep::{preprocess, split_sentences};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ApiError, ErrorCode};
use crate::state::{FeedbackEntry, InputKind, LoadedModel, SharedState, Vote};

/// JSON body whose syntax errors map to `bad_json` and shape errors to `validation_error`.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::new(ErrorCode::BadJson, e.body_text()))?;
        let value: Value =
            serde_json::from_slice(&bytes).map_err(|e| ApiError::new(ErrorCode::BadJson, e.to_string()))?;
        serde_json::from_value(value)
            .map(ApiJson)
            .map_err(|e| ApiError::validation(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelVerdict {
    pub model: String,
    pub verdict: Verdict,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceVerdict {
    pub index: usize,
    pub text: String,
    /// Byte range in the submitted text.
    pub span: (usize, usize),
    pub verdict: Verdict,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictGroup {
    pub group: String,
    pub verdicts: Vec<ModelVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilaritySummary {
    pub metric: Metric,
    pub k: usize,
    pub verdict: Verdict,
    pub score: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub created_at: String,
    pub input: Value,
    pub verdicts: Vec<ModelVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<VerdictGroup>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<SentenceVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbors: Option<Vec<Neighbor>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilaritySummary>,
}

impl CheckResult {
    fn issue(state: &SharedState, input: Value, verdicts: Vec<ModelVerdict>) -> Self {
        CheckResult {
            check_id: state.issue_check_id(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            input,
            verdicts,
            groups: None,
            sentences: None,
            neighbors: None,
            similarity: None,
        }
    }
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/check/paragraph", post(check_paragraph))
        .route("/check/sentences", post(check_sentences))
        .route("/check/tweet", post(check_tweet))
        .route("/similar", post(similar))
        .route("/feedback", post(feedback))
        .route("/feedback/{check_id}", get(feedback_status))
        .route("/models", get(list_models))
        .route("/datasets", get(list_datasets))
        .route("/datasets/{name}", get(download_dataset))
        .route("/health", get(|| async { Json(serde_json::json!({ "status": "ok" })) }))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") })
        .with_state(state)
}

/// Runs CPU-bound prediction off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?
}

fn non_empty(text: &str) -> Result<(), ApiError> {
    if text.trim().is_empty() {
        return Err(ApiError::validation("text must be non-empty").with_fields(vec!["text".into()]));
    }
    Ok(())
}

fn text_model<'a>(state: &'a SharedState, tag: &str) -> Result<&'a LoadedModel, ApiError> {
    let m = state
        .model(tag)
        .ok_or_else(|| ApiError::new(ErrorCode::UnknownModel, format!("unknown model tag {tag:?}")))?;
    if m.input() != InputKind::Text {
        return Err(ApiError::new(ErrorCode::ModelMismatch, format!("model {tag:?} does not take text input")));
    }
    Ok(m)
}

fn verdict_for(tag: &str, p: f64) -> ModelVerdict {
    ModelVerdict { model: tag.to_string(), verdict: Verdict::from_positive(p >= 0.5), probability: p }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParagraphRequest {
    text: String,
    model_tags: Option<Vec<String>>,
}

async fn check_paragraph(
    State(state): State<SharedState>,
    ApiJson(req): ApiJson<ParagraphRequest>,
) -> Result<Json<CheckResult>, ApiError> {
    non_empty(&req.text)?;
    let tags = match req.model_tags {
        Some(t) if t.is_empty() => {
            return Err(ApiError::validation("model_tags must name at least one model")
                .with_fields(vec!["model_tags".into()]))
        }
        Some(t) => t,
        None => state
            .models
            .iter()
            .filter(|m| m.input() == InputKind::Text)
            .map(|m| m.tag.clone())
            .collect(),
    };
    for t in &tags {
        text_model(&state, t)?;
    }
    let st = state.clone();
    let text = req.text.clone();
    let verdicts = blocking(move || {
        tags.iter()
            .map(|t| {
                let m = text_model(&st, t)?;
                let p = m.model.predict_texts(&[text.as_str()])?[0];
                Ok(verdict_for(t, p))
            })
            .collect()
    })
    .await?;
    Ok(Json(CheckResult::issue(&state, serde_json::json!({ "text": req.text }), verdicts)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentencesRequest {
    text: String,
    model_tag: Option<String>,
}

/// Byte spans of each segmented sentence inside `text`.
fn sentence_spans(text: &str, sentences: &[String]) -> Vec<(usize, usize)> {
    let mut cursor = 0;
    sentences
        .iter()
        .map(|s| {
            let start = text[cursor..].find(s.as_str()).map_or(cursor, |i| cursor + i);
            let end = (start + s.len()).min(text.len());
            cursor = end;
            (start, end)
        })
        .collect()
}

async fn check_sentences(
    State(state): State<SharedState>,
    ApiJson(req): ApiJson<SentencesRequest>,
) -> Result<Json<CheckResult>, ApiError> {
    non_empty(&req.text)?;
    let tag = req
        .model_tag
        .or_else(|| state.sentence_model.clone())
        .ok_or_else(|| ApiError::validation("model_tag is required").with_fields(vec!["model_tag".into()]))?;
    text_model(&state, &tag)?;
    let st = state.clone();
    let text = req.text.clone();
    let (paragraph, sentences) = blocking(move || {
        let m = text_model(&st, &tag)?;
        let parts = split_sentences(&text);
        let spans = sentence_spans(&text, &parts);
        let mut docs: Vec<&str> = vec![text.as_str()];
        docs.extend(parts.iter().map(String::as_str));
        let proba = m.model.predict_texts(&docs)?;
        let sentences = parts
            .iter()
            .zip(spans)
            .zip(&proba[1..])
            .enumerate()
            .map(|(index, ((s, span), &p))| SentenceVerdict {
                index,
                text: s.clone(),
                span,
                verdict: Verdict::from_positive(p >= 0.5),
                probability: p,
            })
            .collect::<Vec<_>>();
        Ok((verdict_for(&tag, proba[0]), sentences))
    })
    .await?;
    let mut result = CheckResult::issue(&state, serde_json::json!({ "text": req.text }), vec![paragraph]);
    result.sentences = Some(sentences);
    Ok(Json(result))
}

async fn check_tweet(
    State(state): State<SharedState>,
    ApiJson(body): ApiJson<Value>,
) -> Result<Json<CheckResult>, ApiError> {
    let tweet = tweet_from_json(&body)
        .map_err(|fields| ApiError::validation("tweet record failed validation").with_fields(fields))?;
    let (Some(net_tag), Some(text_tag)) = (state.network_model.clone(), state.content_model.clone()) else {
        return Err(ApiError::new(
            ErrorCode::Unavailable,
            "network_model and content_model must both be configured",
        ));
    };
    let st = state.clone();
    let t = tweet.clone();
    let groups = blocking(move || {
        let net = st
            .model(&net_tag)
            .ok_or_else(|| ApiError::new(ErrorCode::UnknownModel, net_tag.clone()))?;
        let table = FeatureTable::from_vectors(vec![t.id.clone()], vec![extract_features(&t, &st.lexicons)]);
        let p_net = net.model.predict_table(&table)?[0];
        let content = text_model(&st, &text_tag)?;
        let p_text = content.model.predict_texts(&[t.content.as_str()])?[0];
        Ok(vec![
            VerdictGroup { group: "network".into(), verdicts: vec![verdict_for(&net_tag, p_net)] },
            VerdictGroup { group: "content".into(), verdicts: vec![verdict_for(&text_tag, p_text)] },
        ])
    })
    .await?;
    let input = serde_json::to_value(&tweet).map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?;
    let verdicts = groups.iter().flat_map(|g| g.verdicts.clone()).collect();
    let mut result = CheckResult::issue(&state, input, verdicts);
    result.groups = Some(groups);
    Ok(Json(result))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimilarRequest {
    text: String,
    metric: Option<String>,
    k: Option<usize>,
}

async fn similar(
    State(state): State<SharedState>,
    ApiJson(req): ApiJson<SimilarRequest>,
) -> Result<Json<CheckResult>, ApiError> {
    non_empty(&req.text)?;
    let Some(sim) = &state.similarity else {
        return Err(ApiError::new(ErrorCode::Unavailable, "no similarity index is configured"));
    };
    if sim.index.is_empty() {
        return Err(ApiError::new(ErrorCode::Unavailable, "reference index is empty"));
    }
    let metric = match &req.metric {
        Some(m) => m
            .parse::<Metric>()
            .map_err(|e| ApiError::validation(e.to_string()).with_fields(vec!["metric".into()]))?,
        None => sim.metric,
    };
    let k = req.k.unwrap_or(sim.k);
    if k == 0 || k > sim.index.len() {
        return Err(ApiError::validation(format!("k must be in 1..={}", sim.index.len()))
            .with_fields(vec!["k".into()]));
    }
    let cfg = SimilarityConfig { metric, k, tie_rule: TieRule::MisinformativeOnTie };
    let st = state.clone();
    let text = req.text.clone();
    let c = blocking(move || {
        let sim = st.similarity.as_ref().expect("checked above");
        let (q, _) = sim.table.embed_text(&preprocess(&text, &sim.prep));
        Ok(classify_vector(&q, &sim.index, &cfg)?)
    })
    .await?;
    let tag = format!("similarity-{}", metric.as_str());
    let mut result = CheckResult::issue(
        &state,
        serde_json::json!({ "text": req.text, "metric": metric, "k": k }),
        vec![ModelVerdict { model: tag, verdict: c.verdict, probability: c.score }],
    );
    result.similarity = Some(SimilaritySummary { metric, k, verdict: c.verdict, score: c.score, fallback: c.fallback });
    result.neighbors = Some(c.neighbors);
    Ok(Json(result))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackRequest {
    check_id: String,
    vote: Vote,
}

#[derive(Debug, Serialize)]
struct FeedbackAck {
    acknowledged: bool,
    check_id: String,
    vote: Vote,
    votes: usize,
}

async fn feedback(
    State(state): State<SharedState>,
    ApiJson(req): ApiJson<FeedbackRequest>,
) -> Result<Json<FeedbackAck>, ApiError> {
    if !state.is_issued(&req.check_id) {
        return Err(ApiError::new(ErrorCode::UnknownCheck, format!("unknown check_id {:?}", req.check_id)));
    }
    let entry = FeedbackEntry {
        check_id: req.check_id.clone(),
        vote: req.vote,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    };
    let st = state.clone();
    let votes = blocking(move || {
        st.feedback
            .append(&entry)
            .map_err(|e| ApiError::new(ErrorCode::Internal, format!("feedback log: {e}")))
    })
    .await?;
    Ok(Json(FeedbackAck { acknowledged: true, check_id: req.check_id, vote: req.vote, votes }))
}

async fn feedback_status(
    State(state): State<SharedState>,
    Path(check_id): Path<String>,
) -> Result<Json<FeedbackAck>, ApiError> {
    let (vote, votes) = state
        .feedback
        .latest(&check_id)
        .ok_or_else(|| ApiError::new(ErrorCode::UnknownCheck, format!("no feedback for {check_id:?}")))?;
    Ok(Json(FeedbackAck { acknowledged: true, check_id, vote, votes }))
}

#[derive(Debug, Serialize)]
struct ModelInfo {
    tag: String,
    kind: String,
    name: String,
    input: InputKind,
    roles: Vec<&'static str>,
}

async fn list_models(State(state): State<SharedState>) -> Json<Value> {
    let role = |tag: &str| {
        let mut r = Vec::new();
        if state.sentence_model.as_deref() == Some(tag) {
            r.push("sentence");
        }
        if state.network_model.as_deref() == Some(tag) {
            r.push("network");
        }
        if state.content_model.as_deref() == Some(tag) {
            r.push("content");
        }
        r
    };
    let models: Vec<ModelInfo> = state
        .models
        .iter()
        .map(|m| ModelInfo {
            tag: m.tag.clone(),
            kind: m.model.kind.as_str().to_string(),
            name: m.model.kind.display_name().to_string(),
            input: m.input(),
            roles: role(&m.tag),
        })
        .collect();
    let similarity = state.similarity.as_ref().map(|s| {
        serde_json::json!({
            "metric": s.metric,
            "k": s.k,
            "embeddings": s.table.name,
            "dimension": s.table.dim,
            "index_size": s.index.len(),
        })
    });
    Json(serde_json::json!({ "models": models, "similarity": similarity }))
}

#[derive(Debug, Serialize)]
struct DatasetInfo {
    name: String,
    bytes: u64,
}

async fn list_datasets(State(state): State<SharedState>) -> Result<Json<Value>, ApiError> {
    let Some(dir) = &state.datasets_dir else {
        return Ok(Json(serde_json::json!({ "datasets": [] })));
    };
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?;
    for e in entries.flatten() {
        let meta = match e.metadata() {
            Ok(m) if m.is_file() => m,
            _ => continue,
        };
        let name = e.file_name().to_string_lossy().into_owned();
        if !name.starts_with('.') {
            out.push(DatasetInfo { name, bytes: meta.len() });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Json(serde_json::json!({ "datasets": out })))
}

async fn download_dataset(
    State(state): State<SharedState>,
    Path(name): Path<String>,
) -> Result<Response, ApiError> {
    let not_found = || ApiError::new(ErrorCode::NotFound, format!("no dataset named {name:?}"));
    let dir = state.datasets_dir.as_ref().ok_or_else(not_found)?;
    if name.is_empty() || name.starts_with('.') || name.contains(['/', '\\']) {
        return Err(not_found());
    }
    let path = dir.join(&name);
    let bytes = match std::fs::read(&path) {
        Ok(b) if path.is_file() => b,
        _ => return Err(not_found()),
    };
    let mime = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => "text/csv; charset=utf-8",
        Some("jsonl") | Some("json") => "application/json",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], Body::from(bytes)).into_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_locate_each_sentence() {
        let text = "  A claim. Another one!  ";
        let parts = split_sentences(text);
        let spans = sentence_spans(text, &parts);
        assert_eq!(spans.len(), 2);
        for (s, (a, b)) in parts.iter().zip(spans) {
            assert_eq!(&text[a..b], s);
        }
    }
}
