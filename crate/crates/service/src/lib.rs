//! HTTP service around the glitter pipeline.
//!
//! Endpoints:
//!
//! - `POST /api/v1/glitter` with `{"text": ..., "backend_id": ..., "options": {...}}`
//!   answers with the canonical JSON document.
//! - `GET /api/v1/backends` lists the loaded backends and their capabilities.
//! - `GET /healthz` reports status, backend count and version.
//!
//! Errors are JSON objects `{code, message, detail?}`. Submitted texts are
//! processed in memory and never logged.

pub mod api;
pub mod config;
pub mod registry;

use std::sync::Arc;

pub use api::{handle_glitter, router, ApiError, AppState, Limits, VERSION};
pub use config::{BackendSpec, ServiceConfig};
pub use registry::{LoadError, Registry};

use glitter_core::GlitterConfig;

/// Loads the configured backends and builds the application.
pub fn build(config: &ServiceConfig) -> Result<axum::Router, LoadError> {
    let state = state_from_config(config)?;
    Ok(router(state, &config.cors_origins))
}

pub fn state_from_config(config: &ServiceConfig) -> Result<AppState, LoadError> {
    if let Some(p) = &config.palette {
        let text = std::fs::read_to_string(p).map_err(|e| LoadError::Io(p.clone(), e.to_string()))?;
        glitter_core::render::Palette::parse(&text).map_err(|e| LoadError::Config(format!("palette {}: {e}", p.display())))?;
    }
    let registry = Registry::load(&config.backends, config.default_backend.as_deref())?;
    Ok(AppState {
        registry: Arc::new(registry),
        limits: Limits { max_text_chars: config.max_text_chars, max_tokens: config.max_tokens },
        base_config: GlitterConfig::default(),
    })
}

/// Serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let app = build(&config)?;
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    eprintln!("glitter service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
