use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use topicseg::eval::{Likert, Rating};
use topicseg::render::SessionRow;

use crate::store::AppState;

/// Header carrying the assessor name when the body does not.
pub const ASSESSOR_HEADER: &str = "x-assessor";
const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub action_count: usize,
    pub duration_s: i64,
    pub rated_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionList {
    pub total: usize,
    pub items: Vec<SessionSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDetail {
    pub id: String,
    pub duration_s: i64,
    pub actions: Vec<SessionRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressView {
    pub rated: usize,
    pub total: usize,
    pub next_unrated_session_id: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Page {
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct AssessorQuery {
    assessor: Option<String>,
}

enum ApiError {
    NotFound(String),
    Invalid(BTreeMap<&'static str, String>),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, Json(json!({ "error": m }))).into_response(),
            ApiError::Invalid(fields) => {
                (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "error": "invalid rating", "fields": fields })))
                    .into_response()
            }
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "error": m }))).into_response(),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sessions", get(list_sessions))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/rating", put(put_rating).get(get_rating))
        .route("/api/assessors/{name}/progress", get(progress))
        .with_state(state)
}

async fn list_sessions(State(state): State<Arc<AppState>>, Query(page): Query<Page>) -> Json<SessionList> {
    let offset = page.offset.unwrap_or(0);
    let limit = page.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE);
    let items = state.with_ratings(|ratings| {
        state
            .sessions
            .iter()
            .skip(offset)
            .take(limit)
            .map(|s| SessionSummary {
                id: s.table.id.clone(),
                action_count: s.table.rows.len(),
                duration_s: s.duration_s,
                rated_by: ratings.assessors_for(&s.table.id).into_iter().map(str::to_owned).collect(),
            })
            .collect()
    });
    Json(SessionList { total: state.sessions.len(), items })
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionDetail>, ApiError> {
    let s = state.session(&id).ok_or_else(|| unknown_session(&id))?;
    Ok(Json(SessionDetail {
        id: s.table.id.clone(),
        duration_s: s.duration_s,
        actions: s.table.rows.clone(),
    }))
}

fn unknown_session(id: &str) -> ApiError {
    ApiError::NotFound(format!("unknown session {id:?}"))
}

fn header_assessor(headers: &HeaderMap) -> Option<String> {
    headers
        .get(ASSESSOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(|s| s.trim().to_owned())
        .filter(|s| !s.is_empty())
}

async fn get_rating(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<AssessorQuery>,
    headers: HeaderMap,
) -> Result<Json<Rating>, ApiError> {
    state.session(&id).ok_or_else(|| unknown_session(&id))?;
    let assessor = q
        .assessor
        .or_else(|| header_assessor(&headers))
        .ok_or_else(|| ApiError::Invalid(BTreeMap::from([("assessor", "required".to_owned())])))?;
    state
        .with_ratings(|r| r.get(&assessor, &id).cloned())
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("no rating by {assessor:?} for session {id:?}")))
}

/// Checks the body field by field so every problem is reported at once.
fn parse_rating(id: &str, body: &[u8], headers: &HeaderMap) -> Result<Rating, ApiError> {
    let mut errors = BTreeMap::new();
    let value: Value = match serde_json::from_slice(body) {
        Ok(v @ Value::Object(_)) => v,
        Ok(_) => return Err(ApiError::Invalid(BTreeMap::from([("body", "expected a JSON object".to_owned())]))),
        Err(e) => return Err(ApiError::Invalid(BTreeMap::from([("body", e.to_string())]))),
    };

    let from_body = match value.get("assessor") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if !s.trim().is_empty() => Some(s.trim().to_owned()),
        Some(_) => {
            errors.insert("assessor", "expected a non-empty string".to_owned());
            None
        }
    };
    let from_header = header_assessor(headers);
    let assessor = match (from_body, from_header) {
        (Some(b), Some(h)) if b != h => {
            errors.insert("assessor", format!("body names {b:?} but header names {h:?}"));
            None
        }
        (Some(a), _) | (None, Some(a)) => Some(a),
        (None, None) => {
            errors.entry("assessor").or_insert_with(|| "required".to_owned());
            None
        }
    };

    let mut scale = |field: &'static str| match value.get(field) {
        None | Some(Value::Null) => {
            errors.insert(field, "required".to_owned());
            None
        }
        Some(v) => Likert::from_json(v).map_err(|e| errors.insert(field, e)).ok(),
    };
    let topic_quality = scale("topic_quality");
    let segmentation_quality = scale("segmentation_quality");

    let comment = match value.get("comment") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            errors.insert("comment", "expected a string".to_owned());
            None
        }
    };
    let submitted_at = match value.get("submitted_at") {
        None | Some(Value::Null) => now(),
        Some(v) => v.as_i64().unwrap_or_else(|| {
            errors.insert("submitted_at", "expected epoch seconds".to_owned());
            0
        }),
    };

    match (assessor, topic_quality, segmentation_quality) {
        (Some(assessor), Some(topic_quality), Some(segmentation_quality)) if errors.is_empty() => Ok(Rating {
            assessor,
            session_id: id.to_owned(),
            topic_quality,
            segmentation_quality,
            comment,
            submitted_at,
        }),
        _ => Err(ApiError::Invalid(errors)),
    }
}

fn now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as i64)
}

async fn put_rating(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<StatusCode, ApiError> {
    state.session(&id).ok_or_else(|| unknown_session(&id))?;
    let rating = parse_rating(&id, &body, &headers)?;
    let writer = Arc::clone(&state);
    tokio::task::spawn_blocking(move || writer.record(rating))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn progress(State(state): State<Arc<AppState>>, Path(name): Path<String>) -> Json<ProgressView> {
    let view = state.with_ratings(|ratings| {
        let done = ratings.sessions_rated_by(&name);
        let rated = state.sessions.iter().filter(|s| done.contains(s.table.id.as_str())).count();
        let next = state
            .sessions
            .iter()
            .find(|s| !done.contains(s.table.id.as_str()))
            .map(|s| s.table.id.clone());
        ProgressView {
            rated,
            total: state.sessions.len(),
            next_unrated_session_id: next,
        }
    });
    Json(view)
}
