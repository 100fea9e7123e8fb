//! HTTP routes over a [`SessionStore`].
//!
//! | method | path                      | body                                   |
//! |--------|---------------------------|----------------------------------------|
//! | POST   | `/sessions`               | `{set_id, policy, sigma, epsilon}`     |
//! | GET    | `/sessions/{id}`          |                                        |
//! | GET    | `/sessions/{id}/query`    |                                        |
//! | POST   | `/sessions/{id}/feedback` | `{mu}`                                 |
//! | GET    | `/sessions/{id}/estimate` |                                        |
//! | GET    | `/sets`                   |                                        |
//!
//! Errors are `{code, message}` with status 404, 409, 422, or 500. Request
//! bodies with unknown fields are rejected.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::error::ServiceError;
use super::store::{CreateSession, SessionStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackRequest {
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body())).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::Validation(format!("bad request body: {e}")))
}

/// Runs a blocking store call off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sets", get(sets))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state))
        .route("/sessions/{id}/query", get(query))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/estimate", get(estimate))
        .with_state(store)
}

async fn sets(State(store): State<Arc<SessionStore>>) -> impl IntoResponse {
    Json(store.sets())
}

async fn create(State(store): State<Arc<SessionStore>>, body: Bytes) -> Result<Response, ServiceError> {
    let req: CreateSession = parse(&body)?;
    let session_id = blocking(move || store.create_session(req)).await?;
    Ok((StatusCode::CREATED, Json(Created { session_id })).into_response())
}

async fn state(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(store.state(&id)?).into_response())
}

async fn query(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let view = blocking(move || store.next_query(&id)).await?;
    Ok(Json(view).into_response())
}

async fn feedback(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let req: FeedbackRequest = parse(&body)?;
    let ack = blocking(move || store.submit_feedback(&id, req.mu)).await?;
    Ok(Json(ack).into_response())
}

async fn estimate(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let view = blocking(move || store.get_estimate(&id)).await?;
    Ok(Json(view).into_response())
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(store: Arc<SessionStore>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}
