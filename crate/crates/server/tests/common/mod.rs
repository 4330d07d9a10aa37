#![allow(dead_code)]

use std::net::TcpListener;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde_json::{json, Value};
use zonecap_core::imaging::{encode_png, RasterImage};
use zonecap_core::scene::demo_scene;
use zonecap_server::{BackgroundServer, ServerConfig};

pub struct Client {
    agent: ureq::Agent,
    pub base: String,
}

pub struct Reply {
    pub status: u16,
    pub content_type: String,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }

    pub fn error_code(&self) -> String {
        self.json()["error"]["code"].as_str().unwrap_or_default().to_string()
    }
}

fn reply(mut resp: ureq::http::Response<ureq::Body>) -> Reply {
    let status = resp.status().as_u16();
    let content_type = resp
        .headers()
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .unwrap_or_default()
        .to_string();
    let bytes = resp.body_mut().with_config().limit(64 << 20).read_to_vec().unwrap();
    Reply { status, content_type, bytes }
}

impl Client {
    pub fn new(server: &BackgroundServer) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .new_agent();
        Self { agent, base: format!("http://{}", server.addr) }
    }

    pub fn get(&self, path: &str) -> Reply {
        reply(self.agent.get(format!("{}{path}", self.base)).call().unwrap())
    }

    pub fn post(&self, path: &str, body: &Value) -> Reply {
        self.post_raw(path, body.to_string())
    }

    pub fn post_raw(&self, path: &str, body: String) -> Reply {
        reply(
            self.agent
                .post(format!("{}{path}", self.base))
                .header("content-type", "application/json")
                .send(body)
                .unwrap(),
        )
    }

    pub fn create(&self, frame: &RasterImage, mode: &str) -> Reply {
        self.post("/v1/captures", &json!({"framePngBase64": frame_b64(frame), "mode": mode}))
    }

    /// Polls until the job is terminal.
    pub fn wait_job(&self, job_id: &str, limit: Duration) -> Value {
        let started = Instant::now();
        loop {
            let view = self.get(&format!("/v1/jobs/{job_id}")).json();
            let state = view["state"].as_str().unwrap_or_default();
            if state == "succeeded" || state == "failed" || started.elapsed() > limit {
                return view;
            }
            std::thread::sleep(Duration::from_millis(20));
        }
    }
}

pub fn frame_b64(frame: &RasterImage) -> String {
    STANDARD.encode(encode_png(frame).unwrap())
}

pub fn demo_frame() -> RasterImage {
    demo_scene().render()
}

/// The ring of the demo scene traced as a stroke.
pub fn demo_stroke() -> Value {
    let pts: Vec<[f64; 2]> = demo_scene().ring.expect("demo scene has a ring").stroke_points(96).into_iter().map(|(x, y)| [x, y]).collect();
    json!({ "points": pts })
}

pub fn start(cfg: ServerConfig) -> (BackgroundServer, Client) {
    let mut cfg = cfg;
    cfg.bind = "127.0.0.1:0".into();
    let server = BackgroundServer::start(cfg).expect("server starts");
    let client = Client::new(&server);
    (server, client)
}

/// Accepts connections and never answers.
pub fn silent_backend() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let mut held = Vec::new();
        for stream in listener.incoming().flatten() {
            held.push(stream);
        }
    });
    url
}
