//! API error type and its JSON body: `{"error": {"code": "...", "message": "..."}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;
use zonecap_core::capture::CaptureError;
use zonecap_core::detection::DetectionError;
use zonecap_core::generation::GenerationError;
use zonecap_core::lasso::LassoError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("frame is not a valid PNG: {0}")]
    MalformedImage(String),
    #[error("session limit of {0} reached")]
    SessionLimitReached(usize),
    #[error("no session {0}")]
    UnknownSession(String),
    #[error("session {0} has expired")]
    SessionExpired(String),
    #[error("{0}")]
    InvalidState(String),
    #[error("objects are not detected yet")]
    NotDetectedYet,
    #[error("{0}")]
    StrokeTooShort(String),
    #[error("{0}")]
    ZoneTooSmall(String),
    #[error("no stroke was drawn and no red line is visible in the frame")]
    NoZone,
    #[error("no object {0} in this session")]
    UnknownObject(String),
    #[error("generation queue is full")]
    QueueFull,
    #[error("no job {0}")]
    UnknownJob(String),
    #[error("job {0} has not finished")]
    NotReady(String),
    #[error("job {0} failed: {1}")]
    JobFailed(String, String),
    #[error("{0}")]
    BackendUnavailable(String),
    #[error("{0}")]
    BackendTimeout(String),
    #[error("{0}")]
    BackendMalformed(String),
    #[error("no route for {0}")]
    NotFound(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct Body<'a> {
    error: Detail<'a>,
}

#[derive(Serialize)]
struct Detail<'a> {
    code: &'a str,
    message: String,
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "BadRequest",
            ApiError::MalformedImage(_) => "MalformedImage",
            ApiError::SessionLimitReached(_) => "SessionLimitReached",
            ApiError::UnknownSession(_) => "UnknownSession",
            ApiError::SessionExpired(_) => "SessionExpired",
            ApiError::InvalidState(_) => "InvalidState",
            ApiError::NotDetectedYet => "NotDetectedYet",
            ApiError::StrokeTooShort(_) => "StrokeTooShort",
            ApiError::ZoneTooSmall(_) => "ZoneTooSmall",
            ApiError::NoZone => "NoZone",
            ApiError::UnknownObject(_) => "UnknownObject",
            ApiError::QueueFull => "QueueFull",
            ApiError::UnknownJob(_) => "UnknownJob",
            ApiError::NotReady(_) => "NotReady",
            ApiError::JobFailed(..) => "JobFailed",
            ApiError::BackendUnavailable(_) => "BackendUnavailable",
            ApiError::BackendTimeout(_) => "BackendTimeout",
            ApiError::BackendMalformed(_) => "MalformedBackendResponse",
            ApiError::NotFound(_) => "NotFound",
            ApiError::Internal(_) => "Internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) | ApiError::MalformedImage(_) => StatusCode::BAD_REQUEST,
            ApiError::SessionLimitReached(_) | ApiError::QueueFull => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::UnknownSession(_)
            | ApiError::UnknownObject(_)
            | ApiError::UnknownJob(_)
            | ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::SessionExpired(_) => StatusCode::GONE,
            ApiError::InvalidState(_) | ApiError::NotDetectedYet | ApiError::NotReady(_) | ApiError::JobFailed(..) => {
                StatusCode::CONFLICT
            }
            ApiError::StrokeTooShort(_) | ApiError::ZoneTooSmall(_) | ApiError::NoZone => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ApiError::BackendUnavailable(_) | ApiError::BackendMalformed(_) => StatusCode::BAD_GATEWAY,
            ApiError::BackendTimeout(_) => StatusCode::GATEWAY_TIMEOUT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body { error: Detail { code: self.code(), message: self.to_string() } };
        (self.status(), Json(body)).into_response()
    }
}

impl From<DetectionError> for ApiError {
    fn from(e: DetectionError) -> Self {
        match e {
            DetectionError::BackendUnavailable(_) => ApiError::BackendUnavailable(e.to_string()),
            DetectionError::BackendTimeout(_) => ApiError::BackendTimeout(e.to_string()),
            DetectionError::MalformedBackendResponse(_) => ApiError::BackendMalformed(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<LassoError> for ApiError {
    fn from(e: LassoError) -> Self {
        match e {
            LassoError::StrokeTooShort(_) => ApiError::StrokeTooShort(e.to_string()),
            LassoError::ZoneTooSmall { .. } => ApiError::ZoneTooSmall(e.to_string()),
            LassoError::NonFinitePoint(..) => ApiError::BadRequest(e.to_string()),
            LassoError::EmptyMask => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<CaptureError> for ApiError {
    fn from(e: CaptureError) -> Self {
        match e {
            CaptureError::NoZone => ApiError::NoZone,
            CaptureError::Lasso(l) => l.into(),
            CaptureError::Detection(d) => d.into(),
        }
    }
}

impl From<GenerationError> for ApiError {
    fn from(e: GenerationError) -> Self {
        match e {
            GenerationError::QueueFull => ApiError::QueueFull,
            GenerationError::InvalidPayload(_) => ApiError::BadRequest(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}
