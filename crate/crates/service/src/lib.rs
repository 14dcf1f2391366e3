//! HTTP/JSON claim-checking API: paragraph, sentence, tweet and similarity
//! checks over trained models, append-only feedback, and dataset downloads.

mod error;
pub mod manifest;
mod routes;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::{ApiError, ErrorCode, ServiceError};
pub use manifest::{ModelEntry, ServiceManifest, SimilarityEntry};
pub use routes::{router, CheckResult, ModelVerdict, SentenceVerdict, SimilaritySummary, VerdictGroup};
pub use state::{AppState, FeedbackEntry, SharedState, Vote};

pub fn app(manifest: &ServiceManifest) -> Result<axum::Router, ServiceError> {
    Ok(router(Arc::new(AppState::from_manifest(manifest)?)))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(manifest: &ServiceManifest, addr: SocketAddr) -> Result<(), ServiceError> {
    let app = app(manifest)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
