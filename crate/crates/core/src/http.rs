//! Blocking JSON-over-HTTP helpers shared by the external backend clients.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Largest response body accepted from a backend.
pub const MAX_BODY_BYTES: u64 = 256 * 1024 * 1024;

#[derive(Debug)]
pub(crate) enum CallError {
    Unavailable(String),
    Timeout,
    Malformed(String),
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
    ureq::Agent::new_with_config(config)
}

fn classify(err: ureq::Error) -> CallError {
    match err {
        ureq::Error::Timeout(_) => CallError::Timeout,
        ureq::Error::Io(e) if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) => {
            CallError::Timeout
        }
        ureq::Error::Json(e) => CallError::Malformed(e.to_string()),
        ureq::Error::StatusCode(code) if (400..500).contains(&code) => {
            CallError::Malformed(format!("backend rejected request with HTTP {code}"))
        }
        other => CallError::Unavailable(other.to_string()),
    }
}

pub(crate) fn post_json<B: Serialize, R: DeserializeOwned>(agent: &ureq::Agent, url: &str, body: &B) -> Result<R, CallError> {
    let mut resp = agent.post(url).send_json(body).map_err(classify)?;
    let text = resp.body_mut().with_config().limit(MAX_BODY_BYTES).read_to_string().map_err(classify)?;
    serde_json::from_str(&text).map_err(|e| CallError::Malformed(e.to_string()))
}

pub(crate) fn get_json<R: DeserializeOwned>(agent: &ureq::Agent, url: &str) -> Result<R, CallError> {
    let mut resp = agent.get(url).call().map_err(classify)?;
    let text = resp.body_mut().with_config().limit(MAX_BODY_BYTES).read_to_string().map_err(classify)?;
    serde_json::from_str(&text).map_err(|e| CallError::Malformed(e.to_string()))
}

pub(crate) fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
