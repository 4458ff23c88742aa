//! `POST /api/v1/generate` and `GET /healthz`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use g2l_core::pipeline::{GenerateResponse, Pipeline};
use g2l_core::Stage;
use serde_json::json;
use tokio::net::TcpListener;

pub const MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;

pub fn router(pipeline: Arc<Pipeline>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/v1/generate", post(generate))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(pipeline)
}

async fn generate(State(pipeline): State<Arc<Pipeline>>, body: Bytes) -> Response {
    let result = tokio::task::spawn_blocking(move || pipeline.infer_bytes(&body)).await;
    match result {
        Ok(Ok(report)) => Json(GenerateResponse::from(&report)).into_response(),
        Ok(Err(e)) => {
            let stage = e.stage();
            let status = if stage == Some(Stage::Decode) {
                StatusCode::BAD_REQUEST
            } else {
                StatusCode::INTERNAL_SERVER_ERROR
            };
            let body = json!({ "error": e.to_string(), "stage": stage.map(Stage::name) });
            (status, Json(body)).into_response()
        }
        Err(join) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": format!("worker failed: {join}"), "stage": null })),
        )
            .into_response(),
    }
}

pub async fn serve(listener: TcpListener, pipeline: Arc<Pipeline>) -> std::io::Result<()> {
    axum::serve(listener, router(pipeline)).await
}
