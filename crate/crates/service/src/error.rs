use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// Startup failures.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("model {tag:?}: {source}")]
    Model {
        tag: String,
        source: infodemic_core::Error,
    },
    #[error(transparent)]
    Core(#[from] infodemic_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadJson,
    ValidationError,
    UnknownModel,
    ModelMismatch,
    UnknownCheck,
    NotFound,
    Unavailable,
    Internal,
}

impl ErrorCode {
    fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadJson => StatusCode::BAD_REQUEST,
            ErrorCode::ValidationError | ErrorCode::ModelMismatch => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::UnknownModel | ErrorCode::UnknownCheck | ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), fields: Vec::new() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::ValidationError, message)
    }

    pub fn with_fields(mut self, fields: Vec<String>) -> Self {
        self.fields = fields;
        self
    }
}

impl From<infodemic_core::Error> for ApiError {
    fn from(e: infodemic_core::Error) -> Self {
        ApiError::new(ErrorCode::Internal, e.to_string())
    }
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a ApiError,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(Body { error: &self })).into_response()
    }
}
