//! HTTP service and headless pipeline around `zonecap-core`.

pub mod api;
pub mod config;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod sessions;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;
use tokio::sync::oneshot;

pub use api::{router, App};
pub use config::{ConfigError, ServerConfig};
pub use error::ApiError;

/// Serves `app` on `listener` until `shutdown` resolves, sweeping idle
/// sessions in the background.
pub async fn serve_on(
    listener: TcpListener,
    app: Arc<App>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let gc_app = Arc::clone(&app);
    let every = Duration::from_secs(app.config.sessions.gc_interval_secs.max(1));
    let gc = tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            gc_app.sessions.collect_garbage();
        }
    });
    let result = axum::serve(listener, router(app)).with_graceful_shutdown(shutdown).await;
    gc.abort();
    result
}

/// A server running on its own runtime thread; stopped on drop.
pub struct BackgroundServer {
    pub addr: SocketAddr,
    pub app: Arc<App>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl BackgroundServer {
    pub fn start(config: ServerConfig) -> std::io::Result<Self> {
        let bind = config.bind.clone();
        Self::start_app(App::new(config), &bind)
    }

    pub fn start_app(app: Arc<App>, bind: &str) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(bind))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let served = Arc::clone(&app);
        let thread = std::thread::spawn(move || {
            runtime.block_on(serve_on(listener, served, async {
                let _ = stopped.await;
            }))
        });
        Ok(Self { addr, app, stop: Some(stop), thread: Some(thread) })
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
