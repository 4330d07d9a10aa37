//! Image-to-3D stage: generator backends, the silhouette-extrusion stub and
//! an asynchronous job queue that also simplifies and packages results.

mod external;
mod queue;
mod stub;

pub use external::{HttpGenerator, WireGenerateRequest, WireGenerateStatus, WireGenerateSubmitted};
pub use queue::{GenerationConfig, GenerationService, JobHook};
pub use stub::{ear_clip, silhouette, simplify_closed, stub_extrude, DepthPolicy, StubParams};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{decode_payload, ObjectPayload};
use crate::imaging::BinaryMask;
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("mask has no set bits")]
    EmptyMask,
    #[error("degenerate silhouette: {0}")]
    DegenerateSilhouette(String),
    #[error("generation queue is full")]
    QueueFull,
    #[error("generator backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("generator backend timed out after {0} ms")]
    BackendTimeout(u64),
    #[error("malformed generator response: {0}")]
    MalformedBackendResponse(String),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("post-processing failed: {0}")]
    PostProcess(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorBackendKind {
    External,
    #[default]
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub payload: ObjectPayload,
    /// Passed through to the backend untouched.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub requested_at_ms: u64,
}

impl GenerationRequest {
    pub fn new(payload: ObjectPayload) -> Self {
        Self { payload, params: BTreeMap::new(), requested_at_ms: crate::now_ms() }
    }
}

pub trait MeshGenerator: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, req: &GenerationRequest) -> Result<Mesh, GenerationError>;
}

/// Extrudes the payload's opaque pixels.
#[derive(Debug, Clone, Default)]
pub struct StubGenerator {
    pub params: StubParams,
}

impl MeshGenerator for StubGenerator {
    fn name(&self) -> &str {
        "stub"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Mesh, GenerationError> {
        let img = decode_payload(&req.payload).map_err(|e| GenerationError::InvalidPayload(e.to_string()))?;
        let alpha: Vec<bool> = img.pixels().map(|p| p[3] > 0).collect();
        let mask = BinaryMask::from_bits(img.width(), img.height(), alpha).expect("one bit per pixel");
        stub_extrude(&mask, &self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Succeeded | JobState::Failed)
    }

    fn rank(self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Running => 1,
            JobState::Succeeded | JobState::Failed => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobTimings {
    pub conversion_ms: Option<u64>,
    pub simplify_ms: Option<u64>,
    pub export_ms: Option<u64>,
    pub load_render_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationJob {
    pub job_id: String,
    pub label: String,
    pub backend: GeneratorBackendKind,
    state: JobState,
    result: Option<Arc<Mesh>>,
    asset: Option<Arc<Vec<u8>>>,
    error: Option<String>,
    pub timings: JobTimings,
    pub input_vertices: Option<usize>,
}

impl GenerationJob {
    pub(crate) fn new(job_id: String, label: String, backend: GeneratorBackendKind) -> Self {
        Self {
            job_id,
            label,
            backend,
            state: JobState::Queued,
            result: None,
            asset: None,
            error: None,
            timings: JobTimings::default(),
            input_vertices: None,
        }
    }

    pub fn state(&self) -> JobState {
        self.state
    }

    /// Present iff the job succeeded.
    pub fn result(&self) -> Option<&Arc<Mesh>> {
        self.result.as_ref()
    }

    /// Binary glTF of the result.
    pub fn asset(&self) -> Option<&Arc<Vec<u8>>> {
        self.asset.as_ref()
    }

    pub fn error(&self) -> Option<&str> {
        self.error.as_deref()
    }

    pub(crate) fn start(&mut self) -> bool {
        self.advance(JobState::Running)
    }

    pub(crate) fn succeed(&mut self, mesh: Mesh, asset: Vec<u8>) -> bool {
        if !self.advance(JobState::Succeeded) {
            return false;
        }
        self.result = Some(Arc::new(mesh));
        self.asset = Some(Arc::new(asset));
        true
    }

    pub(crate) fn fail(&mut self, error: String) -> bool {
        if !self.advance(JobState::Failed) {
            return false;
        }
        self.error = Some(error);
        true
    }

    /// Forward-only; terminal states are final.
    fn advance(&mut self, next: JobState) -> bool {
        if self.state.is_terminal() || next.rank() <= self.state.rank() {
            return false;
        }
        self.state = next;
        true
    }
}
