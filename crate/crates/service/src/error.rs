use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};
use termlab_core::completion::CompletionError;

/// An error rendered as `{"error": {"code", "message", "detail"}}`.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn unknown_session(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown-session", format!("no session with id {id}"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CompletionError> for ApiError {
    fn from(e: CompletionError) -> Self {
        let status = match e {
            CompletionError::UnknownEquation(_) | CompletionError::UnknownRule(_) => StatusCode::NOT_FOUND,
            CompletionError::InvalidOrder(_) | CompletionError::Term(_) => StatusCode::BAD_REQUEST,
            CompletionError::NotOrientable { .. }
            | CompletionError::VariableViolation { .. }
            | CompletionError::NotApplicable { .. }
            | CompletionError::EmptyHistory
            | CompletionError::Stuck(_) => StatusCode::CONFLICT,
        };
        let detail = match &e {
            CompletionError::NotOrientable { equation, rule, reason }
            | CompletionError::VariableViolation { equation, rule, reason } => {
                json!({ "equation": equation, "rule": rule, "reason": reason })
            }
            CompletionError::NotApplicable { command, reason } => json!({ "command": command, "reason": reason }),
            _ => Value::Null,
        };
        ApiError::new(status, e.code(), e.to_string()).with_detail(detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "error": { "code": self.code, "message": self.message, "detail": self.detail }
        });
        (self.status, Json(body)).into_response()
    }
}
