//! In-memory capture sessions.
//!
//! Zone mode: `open → zoneFinal → detected`. All mode: `open → detected`
//! during creation. A session idle for longer than the TTL becomes
//! `expired` and rejects every request; it is dropped from the store once
//! idle for twice the TTL.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use zonecap_core::detection::DetectedObject;
use zonecap_core::imaging::RasterImage;
use zonecap_core::lasso::{LassoPolygon, Stroke};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureMode {
    Zone,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SessionState {
    Open,
    ZoneFinal,
    Detected,
    Expired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneSource {
    Stroke,
    Line,
}

#[derive(Debug)]
pub struct CaptureSession {
    pub id: String,
    pub mode: CaptureMode,
    pub frame: Arc<RasterImage>,
    pub stroke: Stroke,
    pub zone: Option<LassoPolygon>,
    pub zone_source: Option<ZoneSource>,
    pub objects: Vec<DetectedObject>,
    pub detection_ms: Option<u64>,
    state: SessionState,
    last_active: Instant,
}

impl CaptureSession {
    pub fn new(mode: CaptureMode, frame: RasterImage) -> Self {
        Self {
            id: uuid::Uuid::new_v4().simple().to_string(),
            mode,
            frame: Arc::new(frame),
            stroke: Stroke::new(zonecap_core::now_ms()),
            zone: None,
            zone_source: None,
            objects: Vec::new(),
            detection_ms: None,
            state: SessionState::Open,
            last_active: Instant::now(),
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// Marks the session expired when idle too long, otherwise refreshes it.
    pub fn touch(&mut self, ttl: Duration) -> Result<(), ApiError> {
        if self.state == SessionState::Expired || self.last_active.elapsed() > ttl {
            self.state = SessionState::Expired;
            return Err(ApiError::SessionExpired(self.id.clone()));
        }
        self.last_active = Instant::now();
        Ok(())
    }

    pub fn require(&self, allowed: &[SessionState], action: &str) -> Result<(), ApiError> {
        if allowed.contains(&self.state) {
            return Ok(());
        }
        Err(ApiError::InvalidState(format!("cannot {action} a session in state {}", self.state_name())))
    }

    pub fn state_name(&self) -> &'static str {
        match self.state {
            SessionState::Open => "open",
            SessionState::ZoneFinal => "zoneFinal",
            SessionState::Detected => "detected",
            SessionState::Expired => "expired",
        }
    }

    pub fn set_zone(&mut self, zone: LassoPolygon, source: ZoneSource) {
        debug_assert!(matches!(self.state, SessionState::Open | SessionState::ZoneFinal));
        self.zone = Some(zone);
        self.zone_source = Some(source);
        self.state = SessionState::ZoneFinal;
    }

    pub fn set_detected(&mut self, objects: Vec<DetectedObject>, detection_ms: u64) {
        debug_assert!(match self.mode {
            CaptureMode::Zone => self.state == SessionState::ZoneFinal,
            CaptureMode::All => self.state == SessionState::Open,
        });
        self.objects = objects;
        self.detection_ms = Some(detection_ms);
        self.state = SessionState::Detected;
    }
}

pub type SessionHandle = Arc<tokio::sync::Mutex<CaptureSession>>;

pub struct SessionStore {
    sessions: Mutex<HashMap<String, (SessionHandle, Arc<Mutex<Instant>>)>>,
    ttl: Duration,
    max: usize,
}

impl SessionStore {
    pub fn new(ttl: Duration, max: usize) -> Self {
        Self { sessions: Mutex::new(HashMap::new()), ttl, max }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn insert(&self, session: CaptureSession) -> Result<SessionHandle, ApiError> {
        self.collect_garbage();
        let mut map = self.sessions.lock().unwrap();
        if map.len() >= self.max {
            return Err(ApiError::SessionLimitReached(self.max));
        }
        let id = session.id.clone();
        let handle = Arc::new(tokio::sync::Mutex::new(session));
        map.insert(id, (Arc::clone(&handle), Arc::new(Mutex::new(Instant::now()))));
        Ok(handle)
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        let map = self.sessions.lock().unwrap();
        let (handle, seen) = map.get(id).ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        let mut seen = seen.lock().unwrap();
        if seen.elapsed() <= self.ttl {
            *seen = Instant::now();
        }
        Ok(Arc::clone(handle))
    }

    pub fn remove(&self, id: &str) {
        self.sessions.lock().unwrap().remove(id);
    }

    /// Drops sessions idle for more than twice the TTL; returns how many.
    pub fn collect_garbage(&self) -> usize {
        let mut map = self.sessions.lock().unwrap();
        let before = map.len();
        map.retain(|_, (_, seen)| seen.lock().unwrap().elapsed() <= self.ttl * 2);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> RasterImage {
        RasterImage::new(4, 4, [0, 0, 0, 255]).unwrap()
    }

    #[test]
    fn limit_and_lookup() {
        let store = SessionStore::new(Duration::from_secs(60), 2);
        let a = store.insert(CaptureSession::new(CaptureMode::Zone, frame())).unwrap();
        store.insert(CaptureSession::new(CaptureMode::All, frame())).unwrap();
        assert_eq!(
            store.insert(CaptureSession::new(CaptureMode::Zone, frame())).unwrap_err(),
            ApiError::SessionLimitReached(2)
        );
        let id = a.try_lock().unwrap().id.clone();
        assert!(store.get(&id).is_ok());
        assert!(matches!(store.get("missing"), Err(ApiError::UnknownSession(_))));
        store.remove(&id);
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn idle_sessions_expire_then_vanish() {
        let store = SessionStore::new(Duration::from_millis(40), 8);
        let h = store.insert(CaptureSession::new(CaptureMode::Zone, frame())).unwrap();
        let id = h.try_lock().unwrap().id.clone();
        std::thread::sleep(Duration::from_millis(60));
        let mut s = h.try_lock().unwrap();
        assert!(matches!(s.touch(store.ttl()), Err(ApiError::SessionExpired(_))));
        assert_eq!(s.state(), SessionState::Expired);
        drop(s);
        assert_eq!(store.collect_garbage(), 0);
        std::thread::sleep(Duration::from_millis(40));
        assert_eq!(store.collect_garbage(), 1);
        assert!(matches!(store.get(&id), Err(ApiError::UnknownSession(_))));
    }

    #[test]
    fn transitions_are_guarded() {
        let s = CaptureSession::new(CaptureMode::Zone, frame());
        assert!(s.require(&[SessionState::Open], "stroke").is_ok());
        let err = s.require(&[SessionState::Detected], "list objects of").unwrap_err();
        assert_eq!(err.to_string(), "cannot list objects of a session in state open");
    }
}
