//! Routes and handlers.

use std::collections::{BTreeMap, VecDeque};
use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::Stream;
use serde::Deserialize;
use serde_json::Value;

use crate::backend::{Backend, EventFrame, PhaseChange};
use crate::error::ApiError;

pub type SharedBackend = Arc<dyn Backend>;

pub fn router(backend: SharedBackend) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/material", post(generate_material))
        .route("/sessions/{id}/phase", post(change_phase))
        .route("/sessions/{id}/exercises/{eid}/submissions", post(submit_code))
        .route("/sessions/{id}/report", post(generate_report).get(get_report))
        .route("/sessions/{id}/events", get(stream_events))
        .fallback(no_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(backend)
}

async fn no_route(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no route for {}", uri.path()))
}

async fn wrong_method(method: Method, uri: Uri) -> ApiError {
    ApiError::bad_request(format!("{method} is not supported on {}", uri.path()))
}

/// Runs a blocking backend call on the blocking pool.
async fn blocking<T, F>(backend: &SharedBackend, op: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&dyn Backend) -> Result<T, ApiError> + Send + 'static,
{
    let backend = backend.clone();
    tokio::task::spawn_blocking(move || op(backend.as_ref()))
        .await
        .map_err(|e| {
            tracing::error!(error = %e, "backend task aborted");
            ApiError::internal("the operation was aborted")
        })?
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn create_session(
    State(backend): State<SharedBackend>,
    payload: Result<Json<BTreeMap<String, Value>>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let mut intake = BTreeMap::new();
    for (key, value) in body(payload)? {
        match value {
            Value::String(s) => {
                intake.insert(key, s);
            }
            Value::Null => {}
            other => {
                return Err(ApiError::bad_request(format!("intake field `{key}` must be a string"))
                    .with_detail(serde_json::json!({ "field": key, "got": other })))
            }
        }
    }
    let view = blocking(&backend, move |b| b.create_session(intake)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(backend): State<SharedBackend>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&backend, move |b| b.session(&id)).await?))
}

#[derive(Debug, Deserialize)]
struct MessageBody {
    text: String,
}

async fn post_message(
    State(backend): State<SharedBackend>,
    Path(id): Path<String>,
    payload: Result<Json<MessageBody>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let msg = body(payload)?;
    Ok(Json(blocking(&backend, move |b| b.post_message(&id, &msg.text)).await?))
}

async fn generate_material(
    State(backend): State<SharedBackend>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&backend, move |b| b.generate_material(&id)).await?))
}

#[derive(Debug, Deserialize)]
struct PhaseBody {
    phase: PhaseChange,
}

async fn change_phase(
    State(backend): State<SharedBackend>,
    Path(id): Path<String>,
    payload: Result<Json<PhaseBody>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let to = body(payload)?.phase;
    Ok(Json(blocking(&backend, move |b| b.change_phase(&id, to)).await?))
}

#[derive(Debug, Deserialize)]
struct SubmissionBody {
    step_index: usize,
    source: String,
}

async fn submit_code(
    State(backend): State<SharedBackend>,
    Path((id, eid)): Path<(String, String)>,
    payload: Result<Json<SubmissionBody>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let sub = body(payload)?;
    Ok(Json(
        blocking(&backend, move |b| b.submit_code(&id, &eid, sub.step_index, &sub.source)).await?,
    ))
}

async fn generate_report(
    State(backend): State<SharedBackend>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&backend, move |b| b.generate_report(&id)).await?))
}

async fn get_report(State(backend): State<SharedBackend>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let file_name = format!("{}-report.md", id.replace(|c: char| !c.is_ascii_alphanumeric() && c != '-', "_"));
    let markdown = blocking(&backend, move |b| b.report(&id)).await?;
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{file_name}\""))
        .map_err(|_| ApiError::internal("invalid report file name"))?;
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("text/markdown; charset=utf-8")),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        markdown,
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    from: Option<u64>,
}

fn sse_event(frame: &EventFrame) -> SseEvent {
    let kind = serde_json::to_value(frame.event.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "event".into());
    SseEvent::default()
        .id(frame.sequence_number.to_string())
        .event(kind)
        .data(serde_json::to_string(frame).expect("frame serializes"))
}

/// Replays frames from `from` (or after `Last-Event-ID`), then follows the
/// session live. The stream ends when the server drops the session.
async fn stream_events(
    State(backend): State<SharedBackend>,
    Path(id): Path<String>,
    Query(query): Query<EventsQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    let resume_after = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok());
    let from = query.from.or(resume_after.map(|n| n + 1)).unwrap_or(0).max(1);
    let latest = backend.watch(&id)?;
    let state = (backend, id, from, latest, VecDeque::<EventFrame>::new());
    let stream = futures_util::stream::unfold(state, |(backend, id, mut next, mut latest, mut pending)| async move {
        loop {
            if let Some(frame) = pending.pop_front() {
                let event = sse_event(&frame);
                return Some((Ok(event), (backend, id, next, latest, pending)));
            }
            latest.borrow_and_update();
            match backend.frames(&id, next) {
                Ok(frames) if !frames.is_empty() => {
                    next = frames.last().expect("non-empty").sequence_number + 1;
                    pending.extend(frames);
                }
                Ok(_) => {
                    if latest.changed().await.is_err() {
                        return None;
                    }
                }
                Err(_) => return None,
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}
