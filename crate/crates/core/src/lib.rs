pub mod capture;
pub mod detection;
pub mod generation;
mod http;
pub mod imaging;
pub mod lasso;
pub mod mesh;
pub mod meshops;
pub mod scene;

/// Milliseconds since the Unix epoch.
pub fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
