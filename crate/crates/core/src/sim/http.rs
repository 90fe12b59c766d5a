//! HTTP face of the sim for virtual phones and harnesses.
//!
//! ```text
//! POST /sim/phones/{msisdn}/send        {"body": "..."}  -> {"seq": n}
//! GET  /sim/phones/{msisdn}/inbox?after=n                -> [{seq, direction, body, timestamp}]
//! GET  /healthz                                          -> {"status": "ok"}
//! ```
//!
//! Timestamps are ISO-8601 UTC. Client errors come back as 400 with
//! `{"error": "..."}`.

use std::future::Future;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::clock::Clock;

use super::{InboxEntry, SimError, SmsCenter};

#[derive(Clone)]
struct AppState {
    center: Arc<SmsCenter>,
    clock: Arc<dyn Clock>,
}

#[derive(Debug, Deserialize)]
struct SendRequest {
    body: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SendResponse {
    pub seq: u64,
}

#[derive(Debug, Deserialize)]
struct InboxQuery {
    #[serde(default)]
    after: u64,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for SimError {
    fn into_response(self) -> Response {
        let status = match self {
            SimError::BadMsisdn(_) | SimError::EmptyBody(_) => StatusCode::BAD_REQUEST,
            SimError::Gateway(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (
            status,
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

async fn send(
    State(app): State<AppState>,
    Path(msisdn): Path<String>,
    Json(req): Json<SendRequest>,
) -> Result<Json<SendResponse>, SimError> {
    let seq = app.center.submit_inbound(&msisdn, &req.body, app.clock.now())?;
    Ok(Json(SendResponse { seq }))
}

async fn inbox(
    State(app): State<AppState>,
    Path(msisdn): Path<String>,
    Query(q): Query<InboxQuery>,
) -> Result<Json<Vec<InboxEntry>>, SimError> {
    app.center.pump(app.clock.now())?;
    Ok(Json(app.center.fetch_inbox(&msisdn, q.after)?))
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
}

async fn healthz() -> Json<Health> {
    Json(Health { status: "ok" })
}

pub fn router(center: Arc<SmsCenter>, clock: Arc<dyn Clock>) -> Router {
    Router::new()
        .route("/sim/phones/{msisdn}/send", post(send))
        .route("/sim/phones/{msisdn}/inbox", get(inbox))
        .route("/healthz", get(healthz))
        .with_state(AppState { center, clock })
}

/// Serves `router` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}
