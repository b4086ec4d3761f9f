//! Stateless HTTP scoring service.
//!
//! Routes: `POST /v1/score`, `POST /v1/score_batch`, `GET /healthz`.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;

use super::{ScoreConfig, ScoreRequest, ScoreResult};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchRequest {
    pub items: Vec<ScoreRequest>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchResponse {
    pub items: Vec<ScoreResult>,
}

fn bad_request(msg: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": msg }))).into_response()
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, String> {
    serde_json::from_slice(body).map_err(|e| format!("invalid request body: {e}"))
}

async fn score_one(State(cfg): State<ScoreConfig>, body: Bytes) -> Response {
    match decode::<ScoreRequest>(&body) {
        Ok(req) => Json(req.score(cfg)).into_response(),
        Err(msg) => bad_request(msg),
    }
}

async fn score_batch(State(cfg): State<ScoreConfig>, body: Bytes) -> Response {
    match decode::<BatchRequest>(&body) {
        Ok(batch) => Json(BatchResponse {
            items: batch.items.iter().map(|r| r.score(cfg)).collect(),
        })
        .into_response(),
        Err(msg) => bad_request(msg),
    }
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(defaults: ScoreConfig) -> Router {
    Router::new()
        .route("/v1/score", post(score_one))
        .route("/v1/score_batch", post(score_batch))
        .route("/healthz", get(healthz))
        .with_state(defaults)
}

pub async fn bind(addr: &str) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind {
        addr: addr.to_string(),
        source,
    })
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, defaults: ScoreConfig) -> Result<(), ServiceError> {
    axum::serve(listener, router(defaults)).await?;
    Ok(())
}

/// Binds an ephemeral local port and serves in a background task.
pub async fn spawn_local(defaults: ScoreConfig) -> Result<SocketAddr, ServiceError> {
    let listener = bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(serve(listener, defaults));
    Ok(addr)
}
