//! One-shot capture → isolate → generate → export run, without HTTP.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use zonecap_core::capture::{capture_all, capture_zone, CaptureConfig, CaptureError};
use zonecap_core::detection::{
    encode_payload, DetectorBackendKind, HttpSegmenter, ReferenceSegmenter, SegmentationBackend,
};
use zonecap_core::generation::{GenerationRequest, GenerationService, GeneratorBackendKind, JobState};
use zonecap_core::imaging::{encode_png, PixelRect, RasterImage};
use zonecap_core::lasso::{Point, Stroke};

use crate::config::ServerConfig;
use crate::metrics::{MetricsRecord, MetricsReport, MetricsStore};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("invalid zone: {0}")]
    Zone(#[from] zonecap_core::lasso::LassoError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Encoding(String),
}

pub fn detector_for(cfg: &CaptureConfig) -> Arc<dyn SegmentationBackend> {
    match (&cfg.detector.backend, &cfg.detector.external_url) {
        (DetectorBackendKind::External, Some(url)) => {
            Arc::new(HttpSegmenter::new(url, Duration::from_millis(cfg.detector.timeout_ms)))
        }
        _ => Arc::new(ReferenceSegmenter::new(cfg.stroke_color.clone())),
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Explicit zone vertices; without them the red line in the frame is used.
    pub zone: Option<Vec<Point>>,
    /// Segment the whole frame, ignoring any zone.
    pub all: bool,
    pub backend: GeneratorBackendKind,
    /// Crops (`{n}-{label}.png`), assets (`{n}-{label}.glb`) and
    /// `metrics.json` are written here when set.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineObject {
    pub object_id: String,
    pub label: String,
    pub confidence: f64,
    pub bbox: PixelRect,
    pub job_id: Option<String>,
    pub state: Option<JobState>,
    pub error: Option<String>,
    pub vertices: Option<usize>,
    pub faces: Option<usize>,
    pub crop_path: Option<PathBuf>,
    pub asset_path: Option<PathBuf>,
    #[serde(skip)]
    pub asset: Option<Arc<Vec<u8>>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineReport {
    pub zone_area_px: Option<f64>,
    pub detection_ms: u64,
    pub elapsed_ms: u64,
    pub objects: Vec<PipelineObject>,
    pub metrics: MetricsReport,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

fn file_stem(i: usize, label: &str) -> String {
    let safe: String = label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    format!("{:02}-{safe}", i + 1)
}

pub fn run_pipeline(
    frame: &RasterImage,
    cfg: &ServerConfig,
    opts: &PipelineOptions,
) -> Result<PipelineReport, PipelineError> {
    run_pipeline_with(frame, cfg, opts, &*detector_for(&cfg.capture))
}

pub fn run_pipeline_with(
    frame: &RasterImage,
    cfg: &ServerConfig,
    opts: &PipelineOptions,
    detector: &dyn SegmentationBackend,
) -> Result<PipelineReport, PipelineError> {
    let started = Instant::now();
    let (segmentation, zone_area_px, detection_ms) = if opts.all {
        let (seg, ms) = capture_all(frame, &cfg.capture, detector)?;
        (seg, None, ms)
    } else {
        let stroke = opts.zone.as_deref().map(Stroke::from_points).transpose()?;
        let cap = capture_zone(frame, stroke.as_ref(), &cfg.capture, detector)?;
        (cap.segmentation, Some(cap.zone.area_px()), cap.detection_ms)
    };

    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.clone(), source })?;
    }

    let metrics = MetricsStore::new();
    let service = GenerationService::new(&cfg.generation, Some(cfg.mesh), None);
    let mut submitted = Vec::new();
    for obj in &segmentation.objects {
        let payload = encode_payload(obj).map_err(|e| PipelineError::Encoding(e.to_string()))?;
        submitted.push(service.submit(GenerationRequest::new(payload), opts.backend));
    }

    let wait = Duration::from_millis(cfg.generation.timeout_ms.saturating_add(5_000));
    let mut objects = Vec::with_capacity(submitted.len());
    for (i, (obj, job_id)) in segmentation.objects.iter().zip(submitted).enumerate() {
        let stem = file_stem(i, &obj.label);
        let mut out = PipelineObject {
            object_id: obj.id.clone(),
            label: obj.label.clone(),
            confidence: obj.confidence,
            bbox: obj.bbox,
            job_id: None,
            state: None,
            error: None,
            vertices: None,
            faces: None,
            crop_path: None,
            asset_path: None,
            asset: None,
        };
        if let Some(dir) = &opts.out_dir {
            let path = dir.join(format!("{stem}.png"));
            write(&path, &encode_png(&obj.crop).map_err(|e| PipelineError::Encoding(e.to_string()))?)?;
            out.crop_path = Some(path);
        }
        match job_id {
            Err(e) => out.error = Some(e.to_string()),
            Ok(job_id) => {
                let job = service.wait(&job_id, wait).expect("submitted job is tracked");
                metrics.upsert(MetricsRecord {
                    job_id: Some(job_id.clone()),
                    detection_ms: Some(detection_ms),
                    conversion_ms: job.timings.conversion_ms,
                    simplify_ms: job.timings.simplify_ms,
                    export_ms: job.timings.export_ms,
                    ..Default::default()
                });
                out.state = Some(job.state());
                out.error = job.error().map(str::to_string);
                out.vertices = job.result().map(|m| m.vertex_count());
                out.faces = job.result().map(|m| m.face_count());
                if let (Some(dir), Some(asset)) = (&opts.out_dir, job.asset()) {
                    let path = dir.join(format!("{stem}.glb"));
                    write(&path, asset)?;
                    out.asset_path = Some(path);
                }
                out.asset = job.asset().cloned();
                out.job_id = Some(job_id);
            }
        }
        objects.push(out);
    }

    let report = PipelineReport {
        zone_area_px,
        detection_ms,
        elapsed_ms: started.elapsed().as_millis() as u64,
        objects,
        metrics: metrics.report(),
    };
    if let Some(dir) = &opts.out_dir {
        let json = serde_json::to_vec_pretty(&report).map_err(|e| PipelineError::Encoding(e.to_string()))?;
        write(&dir.join("metrics.json"), &json)?;
    }
    Ok(report)
}
