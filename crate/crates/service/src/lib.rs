//! JSON-over-HTTP exploration API: upload datasets, open sessions, drill, roll up and adapt.
//!
//! Sessions live in memory and are evicted after an idle period. Mutations on one session
//! are serialized; a mutation that finds the session busy is refused with 409.

mod config;
mod error;
mod handlers;
mod registry;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;

pub use config::ServiceConfig;
pub use error::ApiError;
pub use handlers::{AdaptRequest, AdaptResponse, CreateSession, DatasetInfo, DrillRequest, ScenarioName, SessionCreated};
pub use registry::{DatasetEntry, Registry, SessionEntry};

/// Shared state behind every handler.
#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub config: ServiceConfig,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self { registry: Arc::new(Registry::default()), config }
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_upload_bytes;
    Router::new()
        .route("/datasets", post(handlers::upload_dataset))
        .route("/sessions", post(handlers::create_session))
        .route("/sessions/{id}/drill", post(handlers::drill))
        .route("/sessions/{id}/rollup", post(handlers::rollup))
        .route("/sessions/{id}/adapt", post(handlers::adapt))
        .route("/sessions/{id}/view", get(handlers::view))
        .route("/sessions/{id}/counters", get(handlers::counters))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Serves until `shutdown` resolves, evicting idle sessions in the background.
pub async fn serve(config: ServiceConfig, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let state = AppState::new(config.clone());
    let sweeper = tokio::spawn(registry::evict_loop(state.registry.clone(), config.idle_ttl));
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let result = axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await;
    sweeper.abort();
    result
}
