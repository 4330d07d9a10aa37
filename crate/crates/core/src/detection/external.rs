//! Client for an external instance-segmentation service (wire contract `v1`).
//!
//! `POST {base}/v1/detect` with [`WireDetectRequest`]; the service answers
//! with [`WireDetectResponse`]. Masks travel run-length encoded (see
//! [`super::rle`]) over the submitted image's full extent.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{rle, BackendOutput, DetectionError, RawDetection, SegmentationBackend};
use crate::http::{self, CallError};
use crate::imaging::{encode_png, RasterImage};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireDetectRequest {
    pub version: String,
    pub image_png_base64: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireDetection {
    pub label: String,
    pub confidence: f64,
    pub rle_mask: Vec<u32>,
    /// `[x, y, w, h]`; informational, the mask is authoritative.
    #[serde(default)]
    pub bbox: Option<[u32; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireDetectResponse {
    pub detections: Vec<WireDetection>,
    #[serde(default)]
    pub latency_ms: Option<u64>,
}

pub struct HttpSegmenter {
    url: String,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpSegmenter {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        Self { url: http::join_url(base_url, "v1/detect"), timeout, agent: http::agent(timeout) }
    }
}

impl SegmentationBackend for HttpSegmenter {
    fn name(&self) -> &str {
        "external"
    }

    fn infer(&self, img: &RasterImage) -> Result<BackendOutput, DetectionError> {
        let png = encode_png(img)?;
        let req = WireDetectRequest {
            version: "v1".into(),
            image_png_base64: STANDARD.encode(png),
            width: img.width(),
            height: img.height(),
        };
        let resp: WireDetectResponse = http::post_json(&self.agent, &self.url, &req).map_err(|e| match e {
            CallError::Timeout => DetectionError::BackendTimeout(self.timeout.as_millis() as u64),
            CallError::Unavailable(m) => DetectionError::BackendUnavailable(m),
            CallError::Malformed(m) => DetectionError::MalformedBackendResponse(m),
        })?;
        let detections = resp
            .detections
            .into_iter()
            .map(|d| {
                let mask = rle::decode(&d.rle_mask, img.width(), img.height())
                    .map_err(|e| DetectionError::MalformedBackendResponse(format!("rle_mask for `{}`: {e}", d.label)))?;
                Ok(RawDetection { label: d.label, confidence: d.confidence, mask })
            })
            .collect::<Result<Vec<_>, DetectionError>>()?;
        Ok(BackendOutput { detections, latency_ms: resp.latency_ms })
    }
}
