use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Form, Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::collection::{system_clock, Collection, UploadPart, MAX_UPLOAD_BYTES};
use crate::{ServiceConfig, ServiceError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = Arc<Collection>;

/// Builds the HTTP routes. Stimulus files are served under `/stimuli/` when
/// a directory is given.
pub fn router(collection: Arc<Collection>, stimuli_dir: Option<&std::path::Path>) -> Router {
    let mut app = Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/experiments/{id}", get(get_experiment))
        .route("/experiments/{id}/sessions", post(create_session))
        .route("/sessions/{id}/presign", get(presign))
        .route("/sessions/{id}/results", post(form_result))
        .route("/uploads/{token}", put(upload));
    if let Some(dir) = stimuli_dir {
        app = app.nest_service("/stimuli", ServeDir::new(dir));
    }
    // Form bodies are url-encoded, so they get headroom over the CSV cap.
    app.layer(DefaultBodyLimit::max(3 * MAX_UPLOAD_BYTES))
        .layer(CorsLayer::permissive())
        .with_state(collection)
}

async fn get_experiment(
    State(c): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let spec = c.experiment(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], spec.to_json()).into_response())
}

async fn create_session(
    State(c): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let s = tokio::task::spawn_blocking(move || c.create_session(&id))
        .await
        .expect("session task")?;
    let body = json!({
        "sessionId": s.session_id,
        "experimentId": s.experiment_id,
        "assignment": s.assignment,
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn presign(
    State(c): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let ticket = c.presign_upload(&id)?;
    Ok(Json(json!({ "uploadURL": ticket.upload_path })).into_response())
}

async fn upload(
    State(c): State<Shared>,
    Path(token): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    body: String,
) -> Result<Response, ServiceError> {
    let part = match query.get("part").map(String::as_str) {
        None | Some("results") => UploadPart::Results,
        Some("descriptions") => UploadPart::Descriptions,
        Some(other) => {
            return Err(ServiceError::Schema(format!(
                "unknown upload part `{other}`"
            )))
        }
    };
    let s = tokio::task::spawn_blocking(move || c.store_result(&token, part, &body))
        .await
        .expect("upload task")?;
    Ok(Json(json!({ "sessionId": s.session_id, "state": s.state })).into_response())
}

#[derive(Deserialize)]
struct ResultForm {
    #[serde(rename = "dataOutput")]
    data_output: String,
    descriptions: Option<String>,
}

async fn form_result(
    State(c): State<Shared>,
    Path(id): Path<String>,
    Form(form): Form<ResultForm>,
) -> Result<Response, ServiceError> {
    let s = tokio::task::spawn_blocking(move || {
        c.accept_form_result(&id, &form.data_output, form.descriptions.as_deref())
    })
    .await
    .expect("upload task")?;
    Ok(Json(json!({ "sessionId": s.session_id, "state": s.state })).into_response())
}

/// Serves on an already bound listener until the process exits.
pub async fn serve_on(listener: TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

pub async fn serve(config: &ServiceConfig) -> Result<(), ServiceError> {
    let collection = Arc::new(config.build(system_clock())?);
    let app = router(collection, config.stimuli_dir.as_deref());
    let addr = format!("{}:{}", config.host, config.port);
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {addr}: {e}")))?;
    serve_on(listener, app)
        .await
        .map_err(|e| ServiceError::Config(format!("server error: {e}")))
}
