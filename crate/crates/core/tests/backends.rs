//! External backend clients and the generation queue against in-process
//! mock services.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde_json::{json, Value};
use zonecap_core::detection::{encode_image_payload, rle, segment, DetectionError, DetectorConfig, HttpSegmenter};
use zonecap_core::generation::{
    GenerationConfig, GenerationError, GenerationJob, GenerationRequest, GenerationService, GeneratorBackendKind,
    HttpGenerator, JobHook, JobState, MeshGenerator,
};
use zonecap_core::imaging::{decode_png, BinaryMask, RasterImage};
use zonecap_core::mesh::{cuboid, icosphere, validate_mesh, Mesh};
use zonecap_core::meshops::{export_obj, import_glb, DecimationParams};

type Handler = dyn Fn(&str, &str, &str) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server: one request per connection, answered by
/// `handler(method, path, body)`.
fn serve(handler: Arc<Handler>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let handler = Arc::clone(&handler);
            thread::spawn(move || respond(stream, &*handler));
        }
    });
    format!("http://{addr}")
}

fn respond(stream: TcpStream, handler: &Handler) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    let mut parts = request_line.split_whitespace();
    let (method, path) = (parts.next().unwrap_or("").to_string(), parts.next().unwrap_or("").to_string());
    let mut length = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    let (status, text) = handler(&method, &path, &String::from_utf8_lossy(&body));
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
}

fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}

fn frame() -> RasterImage {
    RasterImage::new(40, 30, [30, 30, 30, 255]).unwrap()
}

fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y))
}

#[test]
fn detector_round_trip() {
    let seen = Arc::new(Mutex::new(None));
    let seen2 = Arc::clone(&seen);
    let url = serve(Arc::new(move |method, path, body| {
        assert_eq!((method, path), ("POST", "/v1/detect"));
        let req: Value = serde_json::from_str(body).unwrap();
        let png = STANDARD.decode(req["image_png_base64"].as_str().unwrap()).unwrap();
        let img = decode_png(&png).unwrap();
        let (w, h) = (img.width(), img.height());
        *seen2.lock().unwrap() = Some((w, h, req["width"].as_u64().unwrap(), req["version"].clone()));
        let cup = rle::encode(&rect_mask(w, h, 2, 3, 10, 9));
        let ghost = rle::encode(&rect_mask(w, h, 20, 3, 30, 9));
        let body = json!({"detections": [
            {"label": "cup", "confidence": 0.9, "rle_mask": cup, "bbox": [2, 3, 8, 6]},
            {"label": "ghost", "confidence": 0.3, "rle_mask": ghost},
        ], "latency_ms": 17});
        (200, body.to_string())
    }));
    let backend = HttpSegmenter::new(&url, Duration::from_secs(5));
    let seg = segment(&frame(), None, &DetectorConfig::default(), &backend).unwrap();
    assert_eq!(seg.objects.len(), 1);
    assert_eq!(seg.objects[0].label, "cup");
    assert_eq!(seg.objects[0].mask.count(), 48);
    assert_eq!(seg.backend_latency_ms, Some(17));
    let (w, h, declared, version) = seen.lock().unwrap().clone().unwrap();
    assert_eq!((w, h, declared), (40, 30, 40));
    assert_eq!(version, json!("v1"));
}

#[test]
fn detector_failures_are_typed() {
    let cfg = DetectorConfig::default();
    let dead = HttpSegmenter::new(&dead_url(), Duration::from_secs(2));
    assert!(matches!(segment(&frame(), None, &cfg, &dead), Err(DetectionError::BackendUnavailable(_))));

    let garbage = serve(Arc::new(|_, _, _| (200, "{\"detections\": 5}".into())));
    let backend = HttpSegmenter::new(&garbage, Duration::from_secs(2));
    assert!(matches!(segment(&frame(), None, &cfg, &backend), Err(DetectionError::MalformedBackendResponse(_))));

    let short_rle = serve(Arc::new(|_, _, _| {
        (200, json!({"detections": [{"label": "x", "confidence": 1.0, "rle_mask": [5000, 3]}]}).to_string())
    }));
    let backend = HttpSegmenter::new(&short_rle, Duration::from_secs(2));
    assert!(matches!(segment(&frame(), None, &cfg, &backend), Err(DetectionError::MalformedBackendResponse(_))));

    let slow = serve(Arc::new(|_, _, _| {
        thread::sleep(Duration::from_millis(1500));
        (200, json!({"detections": []}).to_string())
    }));
    let backend = HttpSegmenter::new(&slow, Duration::from_millis(200));
    assert!(matches!(segment(&frame(), None, &cfg, &backend), Err(DetectionError::BackendTimeout(200))));
}

fn square_request() -> GenerationRequest {
    let mut img = RasterImage::new(40, 40, [0, 0, 0, 0]).unwrap();
    for y in 10..30 {
        for x in 10..30 {
            img.put(x, y, [0, 0, 255, 255]);
        }
    }
    GenerationRequest::new(encode_image_payload("blue", &img).unwrap())
}

fn mock_generator(obj: String, polls_before_done: usize) -> String {
    let polls = AtomicUsize::new(0);
    serve(Arc::new(move |method, path, body| match (method, path) {
        ("POST", "/v1/generate") => {
            let req: Value = serde_json::from_str(body).unwrap();
            assert_eq!(req["label"], "blue");
            assert_eq!(req["width_px"], 40);
            (200, json!({"job_id": "j-1"}).to_string())
        }
        ("GET", "/v1/generate/j-1") => {
            if polls.fetch_add(1, Ordering::SeqCst) < polls_before_done {
                (200, json!({"state": "running"}).to_string())
            } else {
                (200, json!({"state": "succeeded", "obj": obj}).to_string())
            }
        }
        _ => (404, "{}".into()),
    }))
}

#[test]
fn external_generator_polls_until_done() {
    let cube = cuboid([0.0; 3], [0.1; 3]);
    let url = mock_generator(export_obj(&cube), 2);
    let generator = HttpGenerator::new(&url, Duration::from_secs(5), Duration::from_millis(10));
    let mesh = generator.generate(&square_request()).unwrap();
    assert_eq!(mesh, cube);
}

#[test]
fn external_generator_failures() {
    let failed = serve(Arc::new(|method, _, _| match method {
        "POST" => (200, json!({"job_id": "z"}).to_string()),
        _ => (200, json!({"state": "failed", "error": "out of memory"}).to_string()),
    }));
    let g = HttpGenerator::new(&failed, Duration::from_secs(5), Duration::from_millis(10));
    assert_eq!(g.generate(&square_request()), Err(GenerationError::BackendUnavailable("out of memory".into())));

    let never = serve(Arc::new(|method, _, _| match method {
        "POST" => (200, json!({"job_id": "z"}).to_string()),
        _ => (200, json!({"state": "queued"}).to_string()),
    }));
    let g = HttpGenerator::new(&never, Duration::from_millis(150), Duration::from_millis(20));
    assert_eq!(g.generate(&square_request()), Err(GenerationError::BackendTimeout(150)));

    let bad_obj = mock_generator("v 0 0\n".into(), 0);
    let g = HttpGenerator::new(&bad_obj, Duration::from_secs(5), Duration::from_millis(10));
    assert!(matches!(g.generate(&square_request()), Err(GenerationError::MalformedBackendResponse(_))));
}

#[test]
fn service_runs_stub_jobs_to_glb() {
    let done = Arc::new(AtomicUsize::new(0));
    let d2 = Arc::clone(&done);
    let hook: JobHook = Arc::new(move |j: &GenerationJob| {
        assert!(j.state().is_terminal());
        d2.fetch_add(1, Ordering::SeqCst);
    });
    let svc = GenerationService::new(&GenerationConfig::default(), Some(DecimationParams::default()), Some(hook));
    let ids: Vec<String> =
        (0..4).map(|_| svc.submit(square_request(), GeneratorBackendKind::Stub).unwrap()).collect();
    assert_eq!(ids.iter().collect::<HashSet<_>>().len(), 4);
    for id in &ids {
        let job = svc.wait(id, Duration::from_secs(10)).unwrap();
        assert_eq!(job.state(), JobState::Succeeded, "{:?}", job.error());
        let mesh = import_glb(job.asset().unwrap()).unwrap();
        assert_eq!((mesh.vertex_count(), mesh.face_count()), (8, 12));
        assert!(validate_mesh(job.result().unwrap()).is_watertight());
        assert!(job.timings.conversion_ms.is_some() && job.timings.simplify_ms.is_some());
        assert_eq!(job.input_vertices, Some(8));
    }
    assert!(svc.record_load_render(&ids[0], 42));
    assert_eq!(svc.job(&ids[0]).unwrap().timings.load_render_ms, Some(42));
    assert!(!svc.record_load_render("nope", 1));
    drop(svc);
    assert_eq!(done.load(Ordering::SeqCst), 4);
}

#[test]
fn unreachable_external_fails_the_job() {
    let cfg = GenerationConfig { external_url: Some(dead_url()), timeout_ms: 2000, ..Default::default() };
    let svc = GenerationService::new(&cfg, None, None);
    let id = svc.submit(square_request(), GeneratorBackendKind::External).unwrap();
    let job = svc.wait(&id, Duration::from_secs(10)).unwrap();
    assert_eq!(job.state(), JobState::Failed);
    assert!(!job.error().unwrap().is_empty());
    assert!(job.result().is_none() && job.asset().is_none());

    let unconfigured = GenerationService::new(&GenerationConfig::default(), None, None);
    let id = unconfigured.submit(square_request(), GeneratorBackendKind::External).unwrap();
    let job = unconfigured.wait(&id, Duration::from_secs(10)).unwrap();
    assert_eq!(job.state(), JobState::Failed);
}

/// Blocks until released, then returns a dense sphere.
struct Gate(Arc<Mutex<bool>>);

impl MeshGenerator for Gate {
    fn name(&self) -> &str {
        "gate"
    }
    fn generate(&self, _: &GenerationRequest) -> Result<Mesh, GenerationError> {
        while !*self.0.lock().unwrap() {
            thread::sleep(Duration::from_millis(5));
        }
        Ok(icosphere(3))
    }
}

#[test]
fn full_queue_rejects_and_decimation_applies() {
    let open = Arc::new(Mutex::new(false));
    let gate: Arc<dyn MeshGenerator> = Arc::new(Gate(Arc::clone(&open)));
    let svc = GenerationService::with_generators(
        1,
        1,
        vec![(GeneratorBackendKind::Stub, gate)],
        Some(DecimationParams::with_target(100)),
        None,
    );
    let first = svc.submit(square_request(), GeneratorBackendKind::Stub).unwrap();
    // wait for the worker to pick the first job so the queue slot is free
    while svc.job(&first).unwrap().state() == JobState::Queued {
        thread::sleep(Duration::from_millis(2));
    }
    let second = svc.submit(square_request(), GeneratorBackendKind::Stub).unwrap();
    assert_eq!(svc.submit(square_request(), GeneratorBackendKind::Stub), Err(GenerationError::QueueFull));
    assert_eq!(svc.job_count(), 2);

    let pending = svc.wait(&first, Duration::from_millis(30)).unwrap();
    assert_eq!(pending.state(), JobState::Running);
    *open.lock().unwrap() = true;
    for id in [first, second] {
        let job = svc.wait(&id, Duration::from_secs(20)).unwrap();
        assert_eq!(job.state(), JobState::Succeeded);
        assert_eq!(job.input_vertices, Some(642));
        let mesh = import_glb(job.asset().unwrap()).unwrap();
        assert!(mesh.vertex_count() <= 100);
        assert!(validate_mesh(&mesh).is_watertight());
    }
}
