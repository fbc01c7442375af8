use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use tweetscope_core::aggregate::AggregateError;

/// Error body: `{"status": 400, "code": "invalid_range", "message": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "ser_status")]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

fn ser_status<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn with_status(mut self, status: StatusCode) -> Self {
        self.status = status;
        self
    }

    pub fn invalid_range(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_range", message)
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_parameter", message)
    }

    pub fn unknown_term(term: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_term", format!("no controversial term {term:?}"))
    }

    pub fn unknown_week(week: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_week", format!("no topic model for week {week}"))
    }

    pub fn not_ready(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "not_ready", message)
    }
}

impl From<AggregateError> for ApiError {
    fn from(e: AggregateError) -> Self {
        match e {
            AggregateError::InvalidRange { .. } => Self::invalid_range(e.to_string()),
            other => Self::bad_parameter(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
