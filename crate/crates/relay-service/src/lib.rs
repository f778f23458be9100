//! HTTP/JSON front end for the experiment runner.
//!
//! Routes:
//! - `GET  /health`
//! - `GET  /v1/presets` lists preset names
//! - `GET  /v1/presets/{name}` returns a preset's TOML source
//! - `POST /v1/run` takes a [`RunRequest`] and returns CSV or JSON
//!
//! Failures return an [`ErrorBody`] with status 400 (config), 422 (infeasible) or 500 (convergence).

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use relay_core::experiment::{self, ErrorBody, OutputFormat, RunRequest};
use relay_core::{Error, ErrorKind};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RELAY_WORKERS";

/// Worker count from [`WORKERS_ENV`], falling back to the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Clone)]
pub struct AppState {
    pool: Arc<rayon::ThreadPool>,
}

impl AppState {
    pub fn new(workers: usize) -> std::io::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .thread_name(|i| format!("relay-worker-{i}"))
            .build()
            .map_err(std::io::Error::other)?;
        Ok(Self { pool: Arc::new(pool) })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

struct ApiError(ErrorBody);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(ErrorBody::from(&e))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.kind {
            ErrorKind::Config => StatusCode::BAD_REQUEST,
            ErrorKind::Infeasible => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::Convergence => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.0)).into_response()
    }
}

async fn health(State(s): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "workers": s.workers() }))
}

async fn presets() -> Json<Vec<&'static str>> {
    Json(experiment::preset_names())
}

async fn preset_source(Path(name): Path<String>) -> Result<Response, ApiError> {
    let src = experiment::preset_source(&name)?;
    Ok(([(header::CONTENT_TYPE, "application/toml")], src).into_response())
}

async fn run(State(s): State<AppState>, body: Result<Json<RunRequest>, axum::extract::rejection::JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(|e| Error::config(format!("bad request body: {}", e.body_text())))?;
    let format = req.format;
    let pool = s.pool.clone();
    let out = tokio::task::spawn_blocking(move || pool.install(|| experiment::run(&req)))
        .await
        .map_err(|e| ApiError(ErrorBody { kind: ErrorKind::Convergence, message: format!("worker task failed: {e}") }))??;
    let ctype = match format {
        OutputFormat::Csv => "text/csv; charset=utf-8",
        OutputFormat::Json => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, ctype)], out).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/presets", get(presets))
        .route("/v1/presets/{name}", get(preset_source))
        .route("/v1/run", post(run))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
