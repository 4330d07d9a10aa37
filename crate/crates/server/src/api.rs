//! HTTP routes and their JSON shapes.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use zonecap_core::capture::{capture_all, zone_from_line};
use zonecap_core::detection::{encode_payload, segment, SegmentationBackend};
use zonecap_core::generation::{
    GenerationJob, GenerationRequest, GenerationService, GeneratorBackendKind, JobHook, JobState, JobTimings,
};
use zonecap_core::imaging::{decode_png, encode_png, PixelRect};
use zonecap_core::lasso::{close_stroke, Point};

use crate::config::ServerConfig;
use crate::error::ApiError;
use crate::pipeline::detector_for;
use crate::metrics::{MetricsRecord, MetricsReport, MetricsStore};
use crate::sessions::{CaptureMode, CaptureSession, SessionState, SessionStore, ZoneSource};

const MAX_REQUEST_BYTES: usize = 64 * 1024 * 1024;

pub struct App {
    pub config: ServerConfig,
    pub sessions: SessionStore,
    pub metrics: Arc<MetricsStore>,
    pub generation: GenerationService,
    pub detector: Arc<dyn SegmentationBackend>,
    jobs: Mutex<HashMap<String, JobOrigin>>,
}

#[derive(Debug, Clone)]
struct JobOrigin {
    session_id: String,
    object_id: String,
}

impl App {
    pub fn new(config: ServerConfig) -> Arc<Self> {
        let detector = detector_for(&config.capture);
        Self::with_detector(config, detector)
    }

    pub fn with_detector(config: ServerConfig, detector: Arc<dyn SegmentationBackend>) -> Arc<Self> {
        let metrics = Arc::new(MetricsStore::new());
        let hook_metrics = Arc::clone(&metrics);
        let asset_dir = config.asset_dir.clone();
        let hook: JobHook = Arc::new(move |job: &GenerationJob| {
            hook_metrics.upsert(MetricsRecord {
                job_id: Some(job.job_id.clone()),
                conversion_ms: job.timings.conversion_ms,
                simplify_ms: job.timings.simplify_ms,
                export_ms: job.timings.export_ms,
                ..Default::default()
            });
            if let (Some(dir), Some(asset)) = (&asset_dir, job.asset()) {
                // spill is best effort; the in-memory copy stays authoritative
                let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(format!("{}.glb", job.job_id)), asset.as_slice()));
            }
        });
        let generation = GenerationService::new(&config.generation, Some(config.mesh), Some(hook));
        Arc::new(Self {
            sessions: SessionStore::new(Duration::from_secs(config.sessions.ttl_secs), config.sessions.max_sessions),
            config,
            metrics,
            generation,
            detector,
            jobs: Mutex::new(HashMap::new()),
        })
    }
}

pub fn router(app: Arc<App>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { Json(serde_json::json!({"status": "ok"})) }))
        .route("/v1/captures", post(create_capture))
        .route("/v1/captures/{id}", get(session_view))
        .route("/v1/captures/{id}/stroke", post(append_stroke))
        .route("/v1/captures/{id}/finalize", post(finalize_zone))
        .route("/v1/captures/{id}/objects", get(list_objects))
        .route("/v1/captures/{id}/generate", post(request_generation))
        .route("/v1/jobs/{id}", get(job_status))
        .route("/v1/jobs/{id}/asset", get(fetch_asset))
        .route("/v1/metrics", get(metrics_report).post(ingest_metrics))
        .fallback(|uri: axum::http::Uri| async move { ApiError::NotFound(uri.path().to_string()) })
        .layer(DefaultBodyLimit::max(MAX_REQUEST_BYTES))
        .with_state(app)
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateCapture {
    frame_png_base64: String,
    mode: CaptureMode,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZoneView {
    pub vertices: Vec<Point>,
    pub area_px: f64,
    pub source: ZoneSource,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub session_id: String,
    pub mode: CaptureMode,
    pub state: SessionState,
    pub width: u32,
    pub height: u32,
    pub stroke_points: usize,
    pub zone: Option<ZoneView>,
    pub object_count: usize,
    pub detection_ms: Option<u64>,
}

impl SessionView {
    fn of(s: &CaptureSession) -> Self {
        Self {
            session_id: s.id.clone(),
            mode: s.mode,
            state: s.state(),
            width: s.frame.width(),
            height: s.frame.height(),
            stroke_points: s.stroke.len(),
            zone: s.zone.as_ref().map(|z| ZoneView {
                vertices: z.vertices().to_vec(),
                area_px: z.area_px(),
                source: s.zone_source.unwrap_or(ZoneSource::Stroke),
            }),
            object_count: s.objects.len(),
            detection_ms: s.detection_ms,
        }
    }
}

async fn create_capture(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateCapture = parse(&body)?;
    let png = STANDARD.decode(req.frame_png_base64.trim()).map_err(|e| ApiError::MalformedImage(e.to_string()))?;
    let frame = blocking(move || decode_png(&png)).await?.map_err(|e| ApiError::MalformedImage(e.to_string()))?;
    let mut session = CaptureSession::new(req.mode, frame);
    if req.mode == CaptureMode::All {
        let (frame, cfg, detector) = (Arc::clone(&session.frame), app.config.capture.clone(), Arc::clone(&app.detector));
        let (seg, ms) = blocking(move || capture_all(&frame, &cfg, &*detector)).await??;
        session.set_detected(seg.objects, ms);
    }
    let handle = app.sessions.insert(session)?;
    let view = SessionView::of(&*handle.lock().await);
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn session_view(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let handle = app.sessions.get(&id)?;
    let mut s = handle.lock().await;
    s.touch(app.sessions.ttl())?;
    Ok(Json(SessionView::of(&s)))
}

#[derive(Debug, Deserialize)]
struct StrokeBody {
    points: Vec<Point>,
}

fn require_zone_mode(s: &CaptureSession, action: &str) -> Result<(), ApiError> {
    if s.mode != CaptureMode::Zone {
        return Err(ApiError::InvalidState(format!("cannot {action} an all-mode session")));
    }
    Ok(())
}

async fn append_stroke(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let req: StrokeBody = parse(&body)?;
    let handle = app.sessions.get(&id)?;
    let mut s = handle.lock().await;
    s.touch(app.sessions.ttl())?;
    require_zone_mode(&s, "stroke")?;
    s.require(&[SessionState::Open], "add stroke points to")?;
    s.stroke.extend(&req.points, zonecap_core::now_ms())?;
    Ok(Json(SessionView::of(&s)))
}

async fn finalize_zone(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let handle = app.sessions.get(&id)?;
    let mut s = handle.lock().await;
    s.touch(app.sessions.ttl())?;
    require_zone_mode(&s, "finalize")?;
    // zoneFinal is only observable after a failed detection; finalizing again retries it
    s.require(&[SessionState::Open, SessionState::ZoneFinal], "finalize")?;

    let started = Instant::now();
    let (frame, cfg, stroke) = (Arc::clone(&s.frame), app.config.capture.clone(), s.stroke.clone());
    let (zone, source) = match &s.zone {
        Some(z) => (z.clone(), s.zone_source.unwrap_or(ZoneSource::Stroke)),
        None => {
            blocking(move || {
                if stroke.is_empty() {
                    zone_from_line(&frame, &cfg).map(|z| (z, ZoneSource::Line))
                } else {
                    close_stroke(&stroke, &cfg.lasso).map(|z| (z, ZoneSource::Stroke)).map_err(Into::into)
                }
            })
            .await??
        }
    };
    s.set_zone(zone.clone(), source);

    let (frame, det_cfg, detector) = (Arc::clone(&s.frame), app.config.capture.detector.clone(), Arc::clone(&app.detector));
    let seg = blocking(move || segment(&frame, Some(&zone), &det_cfg, &*detector)).await??;
    s.set_detected(seg.objects, started.elapsed().as_millis() as u64);
    Ok(Json(SessionView::of(&s)))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectView {
    pub object_id: String,
    pub label: String,
    pub confidence: f64,
    pub bbox: PixelRect,
    pub width_px: u32,
    pub height_px: u32,
    pub thumbnail_png_base64: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectList {
    pub session_id: String,
    pub objects: Vec<ObjectView>,
}

async fn list_objects(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<ObjectList>, ApiError> {
    let handle = app.sessions.get(&id)?;
    let mut s = handle.lock().await;
    s.touch(app.sessions.ttl())?;
    if s.state() != SessionState::Detected {
        return Err(ApiError::NotDetectedYet);
    }
    let objects = s.objects.clone();
    let max_side = app.config.thumbnail_max_px;
    let views = blocking(move || {
        objects
            .into_iter()
            .map(|o| {
                let thumb = encode_png(&o.crop.fit_within(max_side)).map_err(|e| ApiError::Internal(e.to_string()))?;
                Ok(ObjectView {
                    object_id: o.id,
                    label: o.label,
                    confidence: o.confidence,
                    bbox: o.bbox,
                    width_px: o.crop.width(),
                    height_px: o.crop.height(),
                    thumbnail_png_base64: STANDARD.encode(thumb),
                })
            })
            .collect::<Result<Vec<_>, ApiError>>()
    })
    .await??;
    Ok(Json(ObjectList { session_id: s.id.clone(), objects: views }))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GenerateBody {
    object_ids: Vec<String>,
    #[serde(default)]
    backend: GeneratorBackendKind,
    #[serde(default)]
    params: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobsCreated {
    pub job_ids: Vec<String>,
}

async fn request_generation(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: GenerateBody = parse(&body)?;
    if req.object_ids.is_empty() {
        return Err(ApiError::BadRequest("objectIds is empty".into()));
    }
    let handle = app.sessions.get(&id)?;
    let mut s = handle.lock().await;
    s.touch(app.sessions.ttl())?;
    if s.state() != SessionState::Detected {
        return Err(ApiError::NotDetectedYet);
    }
    let mut chosen = Vec::with_capacity(req.object_ids.len());
    for oid in &req.object_ids {
        let obj = s.objects.iter().find(|o| &o.id == oid).ok_or_else(|| ApiError::UnknownObject(oid.clone()))?;
        chosen.push(obj);
    }
    let mut job_ids = Vec::with_capacity(chosen.len());
    for obj in chosen {
        let payload = encode_payload(obj).map_err(|e| ApiError::Internal(e.to_string()))?;
        let mut gen_req = GenerationRequest::new(payload);
        gen_req.params = req.params.clone();
        let job_id = app.generation.submit(gen_req, req.backend)?;
        app.jobs
            .lock()
            .unwrap()
            .insert(job_id.clone(), JobOrigin { session_id: s.id.clone(), object_id: obj.id.clone() });
        app.metrics.upsert(MetricsRecord {
            job_id: Some(job_id.clone()),
            detection_ms: s.detection_ms,
            ..Default::default()
        });
        job_ids.push(job_id);
    }
    Ok((StatusCode::ACCEPTED, Json(JobsCreated { job_ids })).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimingsView {
    pub conversion_ms: Option<u64>,
    pub simplify_ms: Option<u64>,
    pub export_ms: Option<u64>,
    pub load_render_ms: Option<u64>,
}

impl From<JobTimings> for TimingsView {
    fn from(t: JobTimings) -> Self {
        Self {
            conversion_ms: t.conversion_ms,
            simplify_ms: t.simplify_ms,
            export_ms: t.export_ms,
            load_render_ms: t.load_render_ms,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobView {
    pub job_id: String,
    pub session_id: Option<String>,
    pub object_id: Option<String>,
    pub label: String,
    pub backend: GeneratorBackendKind,
    pub state: JobState,
    pub error: Option<String>,
    pub timings: TimingsView,
    pub input_vertices: Option<usize>,
    pub vertices: Option<usize>,
    pub faces: Option<usize>,
    pub asset_url: Option<String>,
}

async fn job_status(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<JobView>, ApiError> {
    let job = app.generation.job(&id).ok_or_else(|| ApiError::UnknownJob(id.clone()))?;
    let origin = app.jobs.lock().unwrap().get(&id).cloned();
    Ok(Json(JobView {
        job_id: job.job_id.clone(),
        session_id: origin.as_ref().map(|o| o.session_id.clone()),
        object_id: origin.map(|o| o.object_id),
        label: job.label.clone(),
        backend: job.backend,
        state: job.state(),
        error: job.error().map(str::to_string),
        timings: job.timings.into(),
        input_vertices: job.input_vertices,
        vertices: job.result().map(|m| m.vertex_count()),
        faces: job.result().map(|m| m.face_count()),
        asset_url: job.asset().map(|_| format!("/v1/jobs/{}/asset", job.job_id)),
    }))
}

async fn fetch_asset(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let job = app.generation.job(&id).ok_or_else(|| ApiError::UnknownJob(id.clone()))?;
    match job.state() {
        JobState::Succeeded => {
            let bytes = job.asset().expect("succeeded jobs carry an asset").as_slice().to_vec();
            Ok(([(header::CONTENT_TYPE, "model/gltf-binary")], bytes).into_response())
        }
        JobState::Failed => Err(ApiError::JobFailed(id, job.error().unwrap_or_default().to_string())),
        JobState::Queued | JobState::Running => Err(ApiError::NotReady(id)),
    }
}

async fn metrics_report(State(app): State<Arc<App>>) -> Json<MetricsReport> {
    Json(app.metrics.report())
}

/// Accepts client-side samples (notably `loadRenderMs`) and whole records.
async fn ingest_metrics(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, ApiError> {
    let record: MetricsRecord = parse(&body)?;
    if let Some(job_id) = &record.job_id {
        if app.generation.job(job_id).is_none() {
            return Err(ApiError::UnknownJob(job_id.clone()));
        }
        if let Some(ms) = record.load_render_ms {
            app.generation.record_load_render(job_id, ms);
        }
    }
    app.metrics.upsert(record);
    Ok((StatusCode::ACCEPTED, Json(serde_json::json!({"records": app.metrics.report().records}))).into_response())
}
