//! Assessment service: lists segmented sessions, renders them as tables, and keeps
//! an append-only log of assessor ratings that is replayed on startup.

mod api;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use api::{router, ProgressView, SessionDetail, SessionList, SessionSummary};
pub use store::{AppState, RatingLog};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Data(#[from] topicseg::Error),
    #[error("ratings log {path}: {source}")]
    Log {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("ratings log {path}:{line}: {message}")]
    Replay { path: PathBuf, line: usize, message: String },
    #[error("duplicate session id {0:?} in sessions file")]
    DuplicateSession(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server stopped: {0}")]
    Serve(#[source] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Segmented sessions, JSON Lines.
    pub sessions: PathBuf,
    /// Append-only ratings log; created when missing.
    pub ratings: PathBuf,
    /// Corpus for document citations; without it document ids are shown.
    pub corpus: Option<PathBuf>,
    /// Classification for topic labels; without it category codes are shown.
    pub classification: Option<PathBuf>,
}

/// A server running on a background task.
pub struct RunningService {
    pub addr: SocketAddr,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<Result<(), ServiceError>>,
}

impl RunningService {
    /// Stops accepting connections and waits for in-flight requests.
    pub async fn stop(self) -> Result<(), ServiceError> {
        let _ = self.shutdown.send(());
        self.task.await.expect("server task panicked")
    }

    /// Runs until the server fails or the process is stopped.
    pub async fn wait(self) -> Result<(), ServiceError> {
        let Self { shutdown, task, .. } = self;
        let outcome = task.await.expect("server task panicked");
        // the sender must outlive the server, or dropping it would stop it
        drop(shutdown);
        outcome
    }
}

pub async fn spawn(config: &ServiceConfig) -> Result<RunningService, ServiceError> {
    let state = Arc::new(AppState::load(config)?);
    let listener = TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: config.addr, source })?;
    let addr = listener.local_addr().map_err(ServiceError::Serve)?;
    let (shutdown, signal) = oneshot::channel::<()>();
    let app = router(state);
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = signal.await;
            })
            .await
            .map_err(ServiceError::Serve)
    });
    Ok(RunningService { addr, shutdown, task })
}

/// Runs until the process is stopped.
pub async fn serve(config: &ServiceConfig) -> Result<(), ServiceError> {
    spawn(config).await?.wait().await
}
