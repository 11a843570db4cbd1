//! The Bayes Cloud registry service: register, search, edit and delete shared
//! models, and run inference or merges on them over HTTP.

mod store;

pub use store::{check_script, tokens, Registry, RegistryError};

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bayescloud_core::api::{
    ApiError, Created, ErrorBody, InferRequest, InferResponse, MergeBody, MergeResponse, ModelRecord, ModelUpdate,
    NewModel, RecordSummary,
};
use serde::Deserialize;
use tower_http::services::ServeDir;

pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "BAYESCLOUD_PORT";
pub const DATA_DIR_ENV: &str = "BAYESCLOUD_DATA_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    /// Built workbench assets served under `/ui`.
    pub ui_dir: Option<PathBuf>,
}

/// Error response: status from the error class, `{code, message, details}` body.
pub struct Failure(StatusCode, ErrorBody);

impl<E: ApiError> From<E> for Failure {
    fn from(e: E) -> Self {
        let status = StatusCode::from_u16(e.class().http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        Failure(status, e.body())
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn bad_body(e: JsonRejection) -> Failure {
    Failure(StatusCode::BAD_REQUEST, ErrorBody::new("invalid_body", e.body_text(), serde_json::Value::Null))
}

type AppState = Arc<Registry>;

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn register(
    State(reg): State<AppState>,
    body: Result<Json<NewModel>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), Failure> {
    let Json(model) = body.map_err(bad_body)?;
    let record = blocking(move || reg.register(model)).await?;
    Ok((StatusCode::CREATED, Json(Created { id: record.id })))
}

async fn search(State(reg): State<AppState>, Query(params): Query<SearchParams>) -> Json<Vec<RecordSummary>> {
    Json(reg.search(&params.q))
}

async fn get_model(State(reg): State<AppState>, Path(id): Path<String>) -> Result<Json<ModelRecord>, Failure> {
    Ok(Json((*reg.get(&id)?).clone()))
}

async fn update_model(
    State(reg): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ModelUpdate>, JsonRejection>,
) -> Result<Json<ModelRecord>, Failure> {
    let Json(update) = body.map_err(bad_body)?;
    Ok(Json(blocking(move || reg.update(&id, update)).await?))
}

async fn delete_model(State(reg): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, Failure> {
    blocking(move || reg.delete(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn infer_model(
    State(reg): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<InferRequest>, JsonRejection>,
) -> Result<Json<InferResponse>, Failure> {
    let Json(request) = body.map_err(bad_body)?;
    Ok(Json(blocking(move || reg.infer(&id, &request)).await?))
}

async fn merge_models(
    State(reg): State<AppState>,
    body: Result<Json<MergeBody>, JsonRejection>,
) -> Result<(StatusCode, Json<MergeResponse>), Failure> {
    let Json(request) = body.map_err(bad_body)?;
    Ok((StatusCode::CREATED, Json(blocking(move || reg.merge(&request)).await?)))
}

async fn ui_missing() -> Failure {
    Failure(
        StatusCode::NOT_FOUND,
        ErrorBody::new("ui_not_available", "no workbench assets are configured", serde_json::Value::Null),
    )
}

/// Runs registry work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, RegistryError> + Send + 'static,
) -> Result<T, Failure> {
    match tokio::task::spawn_blocking(f).await {
        Ok(result) => Ok(result?),
        Err(e) => Err(Failure(
            StatusCode::INTERNAL_SERVER_ERROR,
            ErrorBody::new("internal_error", e.to_string(), serde_json::Value::Null),
        )),
    }
}

/// The HTTP API over `registry`; `/ui` serves `ui_dir` when given.
pub fn router(registry: Arc<Registry>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/models", post(register).get(search))
        .route("/models/{id}", get(get_model).put(update_model).delete(delete_model))
        .route("/models/{id}/infer", post(infer_model))
        .route("/merge", post(merge_models))
        .with_state(registry);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api.route("/ui", get(ui_missing)).route("/ui/{*rest}", get(ui_missing)),
    }
}

/// Binds `addr` and serves until the task is dropped. Returns the bound
/// address (useful with port 0) and the server future.
pub async fn bind(
    config: &ServerConfig,
    addr: SocketAddr,
) -> Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>), RegistryError> {
    let registry = Arc::new(Registry::open(&config.data_dir)?);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| RegistryError::Storage {
        path: config.data_dir.clone(),
        message: format!("cannot listen on {addr}: {e}"),
    })?;
    let local = listener.local_addr().map_err(|e| RegistryError::Storage {
        path: config.data_dir.clone(),
        message: e.to_string(),
    })?;
    let app = router(registry, config.ui_dir.clone());
    Ok((local, async move { axum::serve(listener, app).await }))
}

/// Serves on all interfaces at `config.port` until the process ends.
pub async fn serve(config: ServerConfig) -> Result<(), RegistryError> {
    let (_, server) = bind(&config, SocketAddr::from(([0, 0, 0, 0], config.port))).await?;
    server.await.map_err(|e| RegistryError::Storage { path: config.data_dir.clone(), message: e.to_string() })
}
