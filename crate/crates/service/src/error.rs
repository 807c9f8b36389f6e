use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ctxscope_core::CoreError;
use serde::Serialize;

use crate::API_SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("not found: {}", what.into()))
    }

    /// 400 carrying one message per offending field.
    pub fn invalid(fields: Vec<FieldError>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: "invalid request body".into(),
            fields,
        }
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> FieldError {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match root(&e) {
            CoreError::NotFound(_) => StatusCode::NOT_FOUND,
            CoreError::Input(_) | CoreError::Parse { .. } => StatusCode::BAD_REQUEST,
            CoreError::Provider { .. } => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

fn root(e: &CoreError) -> &CoreError {
    match e {
        CoreError::Stage { cause, .. } => root(cause),
        other => other,
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    schema_version: u32,
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    status: u16,
    message: &'a str,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    fields: &'a [FieldError],
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::warn!(status = %self.status, "{}", self.message);
        }
        let body = ErrorBody {
            schema_version: API_SCHEMA_VERSION,
            error: ErrorDetail {
                status: self.status.as_u16(),
                message: &self.message,
                fields: &self.fields,
            },
        };
        (self.status, Json(body)).into_response()
    }
}
