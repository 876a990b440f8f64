//! HTTP/JSON front end of the broker.
//!
//! All routes live under `/v1`. User-scope routes take
//! `Authorization: Bearer <user_token>`; monitor registration takes the
//! monitor-scope token, and each registered monitor files violations with
//! the token it registered. Errors share one envelope:
//! `{"error": {"code", "message", "details": [...]}}`.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

use std::sync::Arc;

pub use api::{router, CatalogResponse, SelectionResponse};
pub use config::{BrokerConfig, ConfigError};
pub use error::ApiError;
pub use state::{AppState, SelectionRecord, StateError};

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(config: BrokerConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let listen = config.listen;
    let state = Arc::new(AppState::open(config)?);
    let listener = tokio::net::TcpListener::bind(listen).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
