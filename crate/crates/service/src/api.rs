use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use glitter_core::backends::BackendError;
use glitter_core::render::to_structured;
use glitter_core::{glitter_run, ConfigOverrides, GlitterConfig, PipelineError, RunOptions};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::registry::Registry;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_text_chars: usize,
    pub max_tokens: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_text_chars: 200_000, max_tokens: 50_000 }
    }
}

/// Shared, read-only state of the service.
#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub limits: Limits,
    pub base_config: GlitterConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlitterRequest {
    text: String,
    #[serde(default)]
    backend_id: Option<String>,
    #[serde(default)]
    options: Option<Value>,
}

/// An API error: `{code, message, detail?}` with an HTTP status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), detail: None }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"code": self.code, "message": self.message});
        if let Some(d) = self.detail {
            body["detail"] = d;
        }
        (self.status, axum::Json(body)).into_response()
    }
}

fn backend_failure(e: &BackendError, failed_at: Option<usize>) -> ApiError {
    let mut detail = json!({"error": e.to_string()});
    match e {
        BackendError::Transport { attempts, .. } => detail["attempts"] = json!(attempts),
        BackendError::Protocol { excerpt, .. } => detail["excerpt"] = json!(excerpt),
        _ => {}
    }
    if let Some(i) = failed_at {
        detail["failed_at_token"] = json!(i);
    }
    ApiError::new(StatusCode::BAD_GATEWAY, "backend_error", "the language model backend failed").with_detail(detail)
}

pub fn pipeline_error(e: PipelineError) -> ApiError {
    match &e {
        PipelineError::EmptyInput => ApiError::new(StatusCode::BAD_REQUEST, "empty_text", e.to_string()),
        PipelineError::Config(c) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_options", c.to_string()),
        PipelineError::TokenBudget { count, max } => {
            ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "token_budget_exceeded", e.to_string())
                .with_detail(json!({"tokens": count, "max_tokens": max}))
        }
        PipelineError::Tokenization(b) => backend_failure(b, None),
        PipelineError::Partial(p) => backend_failure(&p.source, Some(p.failed_at)),
        PipelineError::Alignment(a) => ApiError::new(StatusCode::BAD_GATEWAY, "backend_error", a.to_string()),
    }
}

fn no_backends() -> ApiError {
    ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no_backends", "no language model backend is loaded")
}

/// Validates and runs one request; shared with the command line so that
/// both produce identical bytes.
pub fn handle_glitter(state: &AppState, body: &[u8]) -> Result<Vec<u8>, ApiError> {
    let req: GlitterRequest = serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", format!("malformed request body: {e}")))?;
    if state.registry.is_empty() {
        return Err(no_backends());
    }
    let chars = req.text.chars().count();
    if chars > state.limits.max_text_chars {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "text_too_large",
            format!("text has {chars} characters, more than the limit of {}", state.limits.max_text_chars),
        )
        .with_detail(json!({"chars": chars, "max_text_chars": state.limits.max_text_chars})));
    }
    if req.text.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_text", "text is empty"));
    }
    let id = match &req.backend_id {
        Some(id) => id.as_str(),
        None => state.registry.default_id().ok_or_else(no_backends)?,
    };
    let backend = state.registry.get(id).ok_or_else(|| {
        ApiError::new(StatusCode::NOT_FOUND, "backend_not_found", format!("no backend with id {id:?}"))
            .with_detail(json!({"available": state.registry.iter().map(|(k, _)| k).collect::<Vec<_>>()}))
    })?;
    let overrides: ConfigOverrides = match req.options {
        None | Some(Value::Null) => ConfigOverrides::default(),
        Some(v) => serde_json::from_value(v)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_options", e.to_string()))?,
    };
    let config = state
        .base_config
        .apply(&overrides)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_options", e.to_string()))?;
    let run = RunOptions { max_tokens: Some(state.limits.max_tokens), ..RunOptions::default() };
    let doc = glitter_run(&req.text, backend.as_ref(), id, &config, &run).map_err(pipeline_error)?;
    Ok(to_structured(&doc))
}

async fn glitter_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let result = tokio::task::spawn_blocking(move || handle_glitter(&state, &body)).await;
    match result {
        Ok(Ok(bytes)) => ([(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Ok(Err(e)) => e.into_response(),
        Err(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "request handler panicked").into_response(),
    }
}

pub fn backends_listing(registry: &Registry) -> Value {
    let list: Vec<Value> = registry
        .iter()
        .map(|(id, b)| {
            json!({
                "backend_id": id,
                "kind": b.kind(),
                "model_id": b.model_id(),
                "description": b.description(),
                "capabilities": b.capabilities(),
            })
        })
        .collect();
    Value::Array(list)
}

async fn backends_handler(State(state): State<AppState>) -> Response {
    axum::Json(backends_listing(&state.registry)).into_response()
}

async fn health_handler(State(state): State<AppState>) -> Response {
    let n = state.registry.len();
    let status = if n > 0 { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    let body = json!({
        "status": if n > 0 { "ok" } else { "unavailable" },
        "loaded_backends": n,
        "version": VERSION,
    });
    (status, axum::Json(body)).into_response()
}

pub fn router(state: AppState, cors_origins: &[String]) -> Router {
    let mut app = Router::new()
        .route("/api/v1/glitter", post(glitter_handler))
        .route("/api/v1/backends", get(backends_handler))
        .route("/healthz", get(health_handler))
        .with_state(state);
    let origins: Vec<HeaderValue> = cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    if !origins.is_empty() {
        app = app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::list(origins))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}
