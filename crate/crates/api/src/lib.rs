//! Read-only JSON API over the artifacts in a data directory.
//!
//! All endpoints live under `/api/v1`. Responses are projections of the
//! loaded artifacts; the artifacts can be swapped at runtime with
//! [`AppState::reload`] (wired to SIGHUP by [`serve`]).

#![forbid(unsafe_code)]

mod artifacts;
pub mod config;
mod error;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use log::{info, warn};
use tokio::net::TcpListener;

pub use artifacts::{Artifacts, LoadError, Meta, CONTROVERSY_FILE, SNAPSHOT_FILE, TOPICS_FILE};
pub use config::{ConfigError, ServerConfig};
pub use error::ApiError;
pub use routes::{router, DEFAULT_N_WORDS, DEFAULT_TOP_N, MAX_N_WORDS, MAX_TOP_N};

/// Shared handle to the currently served artifacts.
#[derive(Clone)]
pub struct AppState {
    data_dir: Arc<PathBuf>,
    current: Arc<RwLock<Option<Arc<Artifacts>>>>,
}

impl AppState {
    /// A state with nothing loaded; every endpoint answers `not_ready`.
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: Arc::new(data_dir.into()),
            current: Arc::new(RwLock::new(None)),
        }
    }

    pub fn with_artifacts(data_dir: impl Into<PathBuf>, artifacts: Artifacts) -> Self {
        let state = Self::new(data_dir);
        state.swap(artifacts);
        state
    }

    pub fn current(&self) -> Option<Arc<Artifacts>> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn swap(&self, artifacts: Artifacts) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::new(artifacts));
    }

    /// Load the data directory again and swap it in. On failure the
    /// previously loaded artifacts stay in place.
    pub fn reload(&self) -> Result<(), LoadError> {
        let artifacts = Artifacts::load(&self.data_dir)?;
        self.swap(artifacts);
        Ok(())
    }
}

#[cfg(unix)]
fn reload_on_sighup(state: AppState) -> std::io::Result<()> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut hup = signal(SignalKind::hangup())?;
    tokio::spawn(async move {
        while hup.recv().await.is_some() {
            match state.reload() {
                Ok(()) => info!("reloaded artifacts from {}", state.data_dir.display()),
                Err(e) => warn!("reload failed, keeping previous artifacts: {e}"),
            }
        }
    });
    Ok(())
}

#[cfg(not(unix))]
fn reload_on_sighup(_state: AppState) -> std::io::Result<()> {
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bind, load the data directory and serve until Ctrl-C.
pub async fn serve(cfg: ServerConfig) -> Result<(), ServeError> {
    let listener = TcpListener::bind(SocketAddr::new(cfg.bind, cfg.port)).await?;
    serve_on(listener, cfg).await
}

/// Like [`serve`] on an already bound listener.
pub async fn serve_on(listener: TcpListener, cfg: ServerConfig) -> Result<(), ServeError> {
    let state = AppState::new(&cfg.data_dir);
    if let Err(e) = state.reload() {
        warn!("serving not_ready until a reload succeeds: {e}");
    }
    reload_on_sighup(state.clone())?;
    let app = router(state, cfg.cors_origin.as_deref())?;
    info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
