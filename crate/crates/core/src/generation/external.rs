//! Client for an external image-to-3D service (wire contract `v1`).
//!
//! `POST {base}/v1/generate` submits a [`WireGenerateRequest`] and returns a
//! service job id; `GET {base}/v1/generate/{id}` is polled until the job
//! reports `succeeded` with the mesh as OBJ text, or `failed`.

use std::collections::BTreeMap;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{GenerationError, GenerationRequest, MeshGenerator};
use crate::http::{self, CallError};
use crate::mesh::Mesh;
use crate::meshops::import_obj;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireGenerateRequest {
    pub version: String,
    pub label: String,
    pub png_base64: String,
    pub width_px: u32,
    pub height_px: u32,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireGenerateSubmitted {
    pub job_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireGenerateStatus {
    pub state: String,
    #[serde(default)]
    pub obj: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

pub struct HttpGenerator {
    base: String,
    timeout: Duration,
    poll_interval: Duration,
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(base_url: &str, timeout: Duration, poll_interval: Duration) -> Self {
        // individual calls get the full budget; the poll loop enforces the total
        Self { base: base_url.to_string(), timeout, poll_interval, agent: http::agent(timeout) }
    }

    fn map_err(&self, e: CallError) -> GenerationError {
        match e {
            CallError::Timeout => GenerationError::BackendTimeout(self.timeout.as_millis() as u64),
            CallError::Unavailable(m) => GenerationError::BackendUnavailable(m),
            CallError::Malformed(m) => GenerationError::MalformedBackendResponse(m),
        }
    }
}

impl MeshGenerator for HttpGenerator {
    fn name(&self) -> &str {
        "external"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Mesh, GenerationError> {
        let started = Instant::now();
        let body = WireGenerateRequest {
            version: "v1".into(),
            label: req.payload.label.clone(),
            png_base64: req.payload.png_base64.clone(),
            width_px: req.payload.width_px,
            height_px: req.payload.height_px,
            params: req.params.clone(),
        };
        let submitted: WireGenerateSubmitted =
            http::post_json(&self.agent, &http::join_url(&self.base, "v1/generate"), &body).map_err(|e| self.map_err(e))?;
        let status_url = http::join_url(&self.base, &format!("v1/generate/{}", submitted.job_id));
        loop {
            let status: WireGenerateStatus = http::get_json(&self.agent, &status_url).map_err(|e| self.map_err(e))?;
            match status.state.as_str() {
                "succeeded" => {
                    let obj = status.obj.ok_or_else(|| {
                        GenerationError::MalformedBackendResponse("succeeded without `obj`".into())
                    })?;
                    return import_obj(&obj).map_err(|e| GenerationError::MalformedBackendResponse(e.to_string()));
                }
                "failed" => {
                    return Err(GenerationError::BackendUnavailable(
                        status.error.unwrap_or_else(|| "backend reported failure".into()),
                    ))
                }
                "queued" | "running" => {}
                other => {
                    return Err(GenerationError::MalformedBackendResponse(format!("unknown state `{other}`")));
                }
            }
            if started.elapsed() >= self.timeout {
                return Err(GenerationError::BackendTimeout(self.timeout.as_millis() as u64));
            }
            thread::sleep(self.poll_interval.min(self.timeout.saturating_sub(started.elapsed())));
        }
    }
}
