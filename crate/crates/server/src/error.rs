use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use codeedu_core::session::SessionError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    TurnLimit,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::TurnLimit => StatusCode::TOO_MANY_REQUESTS,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every 4xx/5xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::not_found(format!("unknown session `{id}`")).with_detail(json!({ "session_id": id }))
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::MissingIntakeField(field) => {
                ApiError::bad_request(message).with_detail(json!({ "field": field }))
            }
            SessionError::InvalidIntakeField { field, .. } => {
                ApiError::bad_request(message).with_detail(json!({ "field": field }))
            }
            SessionError::EmptyQuestion => ApiError::bad_request(message),
            SessionError::PhaseViolation { operation, phase } => ApiError::new(ErrorCode::Conflict, message)
                .with_detail(json!({ "operation": operation, "phase": phase })),
            SessionError::StepMismatch { exercise_id, expected, got } => {
                ApiError::new(ErrorCode::Conflict, message).with_detail(json!({
                    "exercise_id": exercise_id, "expected_step": expected, "step_index": got
                }))
            }
            SessionError::ExerciseComplete(id) => {
                ApiError::new(ErrorCode::Conflict, message).with_detail(json!({ "exercise_id": id }))
            }
            SessionError::NothingToReport => ApiError::new(ErrorCode::Conflict, message),
            SessionError::TurnLimitReached { max_turns } => {
                ApiError::new(ErrorCode::TurnLimit, message).with_detail(json!({ "max_turns": max_turns }))
            }
            SessionError::UnknownExercise(id) => {
                ApiError::not_found(message).with_detail(json!({ "exercise_id": id }))
            }
            SessionError::NoReport => ApiError::not_found(message),
            SessionError::Sandbox(codeedu_core::tools::SandboxError::EmptySource) => ApiError::bad_request(message),
            SessionError::Sandbox(inner) => {
                ApiError::internal("code execution failed").with_detail(json!({ "sandbox": inner.to_string() }))
            }
            SessionError::TaskFailed { task_type, reason } => ApiError::internal(message)
                .with_detail(json!({ "task_type": task_type.as_str(), "reason": reason })),
            SessionError::Llm(_) => ApiError::internal(message).with_detail(json!({ "source": "llm" })),
            SessionError::Planner(_) | SessionError::Agent(_) | SessionError::Tool(_) | SessionError::Io(_) => {
                ApiError::internal(message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}
