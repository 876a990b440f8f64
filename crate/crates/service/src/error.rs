use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};

use rfbroker_core::pipeline::SelectionError;
use rfbroker_core::scoring::ScoringError;
use rfbroker_core::{CatalogError, SlaError, StoreError};

/// Rendered as `{"error": {"code", "message", "details": [...]}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Vec<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn with_details<T: Serialize>(mut self, details: &[T]) -> Self {
        self.details = details
            .iter()
            .map(|d| serde_json::to_value(d).unwrap_or(Value::Null))
            .collect();
        self
    }

    pub fn unauthorized() -> Self {
        Self::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or invalid bearer token",
        )
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn bad_body(err: serde_json::Error) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "schema_error",
            format!("malformed request body: {err}"),
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "error": {
                "code": self.code,
                "message": self.message,
                "details": self.details,
            }
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(err: CatalogError) -> Self {
        match &err {
            CatalogError::Schema(_) => {
                Self::new(StatusCode::BAD_REQUEST, "schema_error", err.to_string())
            }
            CatalogError::Validation(issues) => Self::new(
                StatusCode::BAD_REQUEST,
                "validation_error",
                format!("catalog has {} issue(s)", issues.len()),
            )
            .with_details(issues),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::NotFound(id) => Self::not_found(format!("snapshot {id} not found")),
            other => {
                log::error!("{other}");
                Self::internal(other.to_string())
            }
        }
    }
}

impl From<SelectionError> for ApiError {
    fn from(err: SelectionError) -> Self {
        match err {
            SelectionError::Invalid(violations) => Self::new(
                StatusCode::BAD_REQUEST,
                "validation_error",
                format!("request has {} violation(s)", violations.len()),
            )
            .with_details(&violations),
            SelectionError::Scoring(ScoringError::Validation(violations)) => Self::new(
                StatusCode::BAD_REQUEST,
                "validation_error",
                "invalid request",
            )
            .with_details(&violations),
            SelectionError::Scoring(other) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "scoring_error",
                other.to_string(),
            ),
        }
    }
}

impl From<SlaError> for ApiError {
    fn from(err: SlaError) -> Self {
        let message = err.to_string();
        let (status, code) = match err {
            SlaError::EmptyTerms => (StatusCode::BAD_REQUEST, "empty_terms"),
            SlaError::UnknownAttribute(_) => (StatusCode::BAD_REQUEST, "unknown_attribute"),
            SlaError::InvalidTerm { .. } => (StatusCode::BAD_REQUEST, "invalid_term"),
            SlaError::UnknownProvider(_) => (StatusCode::BAD_REQUEST, "unknown_provider"),
            SlaError::UnknownSla(_) => (StatusCode::NOT_FOUND, "not_found"),
            SlaError::IllegalTransition { .. } => (StatusCode::CONFLICT, "illegal_transition"),
            SlaError::WrongActor { .. } => (StatusCode::CONFLICT, "wrong_actor"),
            SlaError::SlaNotActive { .. } => (StatusCode::CONFLICT, "sla_not_active"),
            SlaError::MonitorExists(_) => (StatusCode::CONFLICT, "monitor_exists"),
            SlaError::UnknownMonitor(_) => (StatusCode::UNAUTHORIZED, "unauthorized"),
            SlaError::UnknownTerm { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_term"),
            SlaError::NotAViolation { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "not_a_violation"),
            SlaError::Storage(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, message)
    }
}
