//! HTTP + JSON routes over a [`SessionStore`].

use std::net::SocketAddr;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use super::{SessionError, SessionStore};
use crate::configuration::Pid;

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn rejected(e: JsonRejection) -> SessionError {
    SessionError::bad_request(e.body_text())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivateBody {
    pid: Pid,
}

fn default_steps() -> u64 {
    1000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AutoBody {
    strategy: String,
    #[serde(default = "default_steps")]
    steps: u64,
    #[serde(default)]
    seed: u64,
}

type Reply = Result<Response, SessionError>;

async fn create(State(store): State<SessionStore>, body: String) -> Reply {
    let state = store.create(&body)?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn show(State(store): State<SessionStore>, Path(id): Path<String>) -> Reply {
    Ok(Json(store.with(&id, |s| Ok(s.state()))?).into_response())
}

async fn activate(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Result<Json<ActivateBody>, JsonRejection>,
) -> Reply {
    let Json(body) = body.map_err(rejected)?;
    Ok(Json(store.with(&id, |s| s.activate(body.pid))?).into_response())
}

async fn auto(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Result<Json<AutoBody>, JsonRejection>,
) -> Reply {
    let Json(body) = body.map_err(rejected)?;
    Ok(Json(store.with(&id, |s| s.auto_run(&body.strategy, body.steps, body.seed))?).into_response())
}

async fn undo(State(store): State<SessionStore>, Path(id): Path<String>) -> Reply {
    Ok(Json(store.with(&id, |s| s.undo())?).into_response())
}

async fn trace(State(store): State<SessionStore>, Path(id): Path<String>) -> Reply {
    let text = store.with(&id, |s| Ok(s.trace().to_jsonl()))?;
    Ok(([("content-type", "application/x-ndjson")], text).into_response())
}

async fn remove(State(store): State<SessionStore>, Path(id): Path<String>) -> Reply {
    store.remove(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

pub fn router(store: SessionStore) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(remove))
        .route("/sessions/{id}/activate", post(activate))
        .route("/sessions/{id}/auto", post(auto))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/trace", get(trace))
        .with_state(store)
}

/// Serves until interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(SessionStore::new()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
