//! Server configuration: TOML file plus `ZONECAP_*` environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zonecap_core::capture::CaptureConfig;
use zonecap_core::detection::DetectorBackendKind;
use zonecap_core::generation::GenerationConfig;
use zonecap_core::meshops::DecimationParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config file: {0}")]
    Parse(String),
    #[error("environment variable {var}={value:?} is invalid")]
    Env { var: &'static str, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub ttl_secs: u64,
    pub max_sessions: usize,
    pub gc_interval_secs: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { ttl_secs: 600, max_sessions: 256, gc_interval_secs: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub bind: String,
    pub capture: CaptureConfig,
    pub generation: GenerationConfig,
    pub mesh: DecimationParams,
    pub sessions: SessionConfig,
    pub thumbnail_max_px: u32,
    /// When set, every finished asset is also written here as `{job_id}.glb`.
    pub asset_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            capture: CaptureConfig::default(),
            generation: GenerationConfig::default(),
            mesh: DecimationParams::default(),
            sessions: SessionConfig::default(),
            thumbnail_max_px: 128,
            asset_dir: None,
        }
    }
}

fn parsed<T: std::str::FromStr>(var: &'static str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Env { var, value: value.to_string() })
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// File (when given), then the process environment, then validation.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("ZONECAP_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("ZONECAP_PORT") {
            let port: u16 = parsed("ZONECAP_PORT", &v)?;
            let host = self.bind.rsplit_once(':').map_or(self.bind.as_str(), |(h, _)| h).to_string();
            self.bind = format!("{host}:{port}");
        }
        if let Some(v) = var("ZONECAP_DETECTOR_URL") {
            self.capture.detector.external_url = Some(v);
            self.capture.detector.backend = DetectorBackendKind::External;
        }
        if let Some(v) = var("ZONECAP_GENERATOR_URL") {
            self.generation.external_url = Some(v);
        }
        if let Some(v) = var("ZONECAP_CONFIDENCE_THRESHOLD") {
            self.capture.detector.confidence_threshold = parsed("ZONECAP_CONFIDENCE_THRESHOLD", &v)?;
        }
        if let Some(v) = var("ZONECAP_TARGET_VERTICES") {
            self.mesh.target_vertices = parsed("ZONECAP_TARGET_VERTICES", &v)?;
        }
        if let Some(v) = var("ZONECAP_WORKERS") {
            self.generation.workers = parsed("ZONECAP_WORKERS", &v)?;
        }
        if let Some(v) = var("ZONECAP_SESSION_TTL_SECS") {
            self.sessions.ttl_secs = parsed("ZONECAP_SESSION_TTL_SECS", &v)?;
        }
        if let Some(v) = var("ZONECAP_ASSET_DIR") {
            self.asset_dir = Some(PathBuf::from(v));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = self.capture.detector.confidence_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(ConfigError::Invalid(format!("confidence_threshold {t} outside [0, 1]")));
        }
        if self.mesh.target_vertices < 4 {
            return Err(ConfigError::Invalid(format!("mesh.target_vertices {} is below 4", self.mesh.target_vertices)));
        }
        if self.generation.workers == 0 || self.generation.queue_capacity == 0 {
            return Err(ConfigError::Invalid("generation workers and queue_capacity must be positive".into()));
        }
        if self.capture.detector.backend == DetectorBackendKind::External && self.capture.detector.external_url.is_none() {
            return Err(ConfigError::Invalid("external detector selected without external_url".into()));
        }
        if self.sessions.max_sessions == 0 || self.thumbnail_max_px == 0 {
            return Err(ConfigError::Invalid("max_sessions and thumbnail_max_px must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ServerConfig::from_toml("").unwrap(), ServerConfig::default());
    }

    #[test]
    fn nested_tables() {
        let cfg = ServerConfig::from_toml(
            r#"
            bind = "0.0.0.0:9000"
            [capture.detector]
            confidence_threshold = 0.7
            [mesh]
            target_vertices = 500
            [generation]
            workers = 4
            "#,
        )
        .unwrap();
        assert_eq!(cfg.bind, "0.0.0.0:9000");
        assert_eq!(cfg.capture.detector.confidence_threshold, 0.7);
        assert_eq!(cfg.mesh.target_vertices, 500);
        assert_eq!(cfg.generation.workers, 4);
        assert_eq!(cfg.generation.queue_capacity, 64);
        assert!(ServerConfig::from_toml("mesh = 3").is_err());
    }

    #[test]
    fn env_overrides() {
        let env: HashMap<&str, &str> = [
            ("ZONECAP_PORT", "7001"),
            ("ZONECAP_DETECTOR_URL", "http://det:5000"),
            ("ZONECAP_TARGET_VERTICES", "64"),
        ]
        .into();
        let mut cfg = ServerConfig::default();
        cfg.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.bind, "127.0.0.1:7001");
        assert_eq!(cfg.capture.detector.backend, DetectorBackendKind::External);
        assert_eq!(cfg.mesh.target_vertices, 64);
        cfg.validate().unwrap();

        let err = cfg.apply_env(|k| (k == "ZONECAP_WORKERS").then(|| "many".to_string())).unwrap_err();
        assert!(matches!(err, ConfigError::Env { var: "ZONECAP_WORKERS", .. }));
    }

    #[test]
    fn validation() {
        let mut cfg = ServerConfig::default();
        cfg.mesh.target_vertices = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = ServerConfig::default();
        cfg.capture.detector.backend = DetectorBackendKind::External;
        assert!(cfg.validate().is_err());
    }
}
