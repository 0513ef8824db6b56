//! HTTP+JSON session service.
//!
//! | method | path | |
//! |--------|------|-|
//! | POST | `/api/sessions` | `{"style": ...}` → 201 `{"session_id", "completed", "prompt"?}` |
//! | GET | `/api/sessions/{id}/question` | current prompt or `{"completed": true}` |
//! | POST | `/api/sessions/{id}/answer` | `{"answer": "yes"\|"no"}` → step outcome |
//! | POST | `/api/sessions/{id}/undo` | prior prompt |
//! | GET | `/api/sessions/{id}/result` | result set, once complete |
//! | GET | `/api/tree/meta` | catalog metadata |
//!
//! Every mutation is appended to the event log before the response is sent.

pub mod log;
mod store;

pub use self::log::{Event, EventLog, EventLogEntry};
pub use store::{
    new_session_id, system_clock, Clock, ReplayReport, SessionRecord, SessionStore, StoreConfig,
};

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::catalog;
use crate::engine::{Answer, EngineError, Prompt, StepOutcome};
use crate::model::{ArchStyle, DecisionTree};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session")]
    UnknownSession,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{0}")]
    BadRequest(String),
    #[error("catalog unavailable: {0}")]
    CatalogUnavailable(String),
    #[error("event log: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession => StatusCode::NOT_FOUND,
            ServiceError::Engine(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::CatalogUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}

/// Shared handler state. Without a catalog every endpoint answers 503.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Result<SessionStore, String>>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Self {
        AppState {
            inner: Arc::new(Ok(store)),
        }
    }

    pub fn unavailable(reason: impl Into<String>) -> Self {
        AppState {
            inner: Arc::new(Err(reason.into())),
        }
    }

    pub fn store(&self) -> Result<&SessionStore, ServiceError> {
        self.inner
            .as_ref()
            .as_ref()
            .map_err(|reason| ServiceError::CatalogUnavailable(reason.clone()))
    }
}

#[derive(Serialize)]
struct Created<'a> {
    session_id: &'a str,
    completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt: Option<Prompt>,
}

fn prompt_payload(prompt: Option<Prompt>) -> Value {
    match prompt {
        Some(prompt) => json!({ "completed": false, "prompt": prompt }),
        None => json!({ "completed": true }),
    }
}

fn outcome_payload(outcome: StepOutcome) -> Value {
    match outcome {
        StepOutcome::NextQuestion(prompt) => {
            json!({ "completed": false, "flow_skipped": false, "prompt": prompt })
        }
        StepOutcome::FlowSkippedThen(prompt) => {
            json!({ "completed": false, "flow_skipped": true, "prompt": prompt })
        }
        StepOutcome::Completed => json!({ "completed": true }),
    }
}

/// Catalog metadata without any question-to-pattern mapping.
pub fn tree_meta(tree: &DecisionTree) -> Value {
    let mut pattern_names: Vec<&str> = tree.patterns.iter().map(|p| p.name.as_str()).collect();
    pattern_names.sort_unstable();
    json!({
        "name": tree.meta.name,
        "version": tree.meta.version,
        "categories": tree.categories.len(),
        "patterns": tree.patterns.len(),
        "category_list": tree.categories.iter().map(|c| json!({
            "id": c.id,
            "name": c.name,
            "description": c.description,
        })).collect::<Vec<_>>(),
        "pattern_names": pattern_names,
        "styles": ArchStyle::ALL.iter().map(|&s| json!({
            "style": s,
            "flows": tree.flows_for(s).len(),
        })).collect::<Vec<_>>(),
    })
}

fn string_field(body: &Bytes, field: &str) -> Result<String, ServiceError> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| ServiceError::BadRequest(format!("request body is not JSON: {e}")))?;
    value
        .get(field)
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| ServiceError::BadRequest(format!("body needs a string field `{field}`")))
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let store = state.store()?;
    let style: ArchStyle = string_field(&body, "style")?
        .parse()
        .map_err(|e: crate::model::UnknownStyle| ServiceError::BadRequest(e.to_string()))?;
    let (session_id, prompt) = store.create(style)?;
    let body = Created {
        session_id: &session_id,
        completed: prompt.is_none(),
        prompt,
    };
    Ok((
        StatusCode::CREATED,
        Json(serde_json::to_value(body).expect("serializable")),
    ))
}

async fn question(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ServiceError> {
    Ok(Json(prompt_payload(state.store()?.question(&id)?)))
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ServiceError> {
    let store = state.store()?;
    let answer: Answer = string_field(&body, "answer")?
        .parse()
        .map_err(|e: crate::engine::InvalidAnswer| ServiceError::BadRequest(e.to_string()))?;
    Ok(Json(outcome_payload(store.answer(&id, answer)?)))
}

async fn undo(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ServiceError> {
    let prompt = state.store()?.undo(&id)?;
    Ok(Json(prompt_payload(Some(prompt))))
}

async fn result(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ServiceError> {
    let result = state.store()?.result(&id)?;
    Ok(Json(serde_json::to_value(result).expect("serializable")))
}

async fn meta(State(state): State<AppState>) -> Result<Json<Value>, ServiceError> {
    Ok(Json(tree_meta(state.store()?.tree())))
}

/// API routes, plus static files from `static_dir` for every other path.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/question", get(question))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/sessions/{id}/undo", post(undo))
        .route("/api/sessions/{id}/result", get(result))
        .route("/api/tree/meta", get(meta))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// `None` serves the compiled-in catalog.
    pub catalog: Option<PathBuf>,
    pub log_path: PathBuf,
    pub session_ttl: Duration,
    pub static_dir: Option<PathBuf>,
}

/// Loads the catalog and replays the log. A catalog that fails to parse
/// yields a state that answers 503 instead of an error.
pub fn build_state(config: &ServiceConfig) -> Result<AppState, ServiceError> {
    let tree = match catalog::open_tree(config.catalog.as_deref()) {
        Ok(tree) => Arc::new(tree),
        Err(e) => {
            ::log::error!("{e}");
            return Ok(AppState::unavailable(e.to_string()));
        }
    };
    let mut store_config = StoreConfig::new(&config.log_path);
    store_config.session_ttl = config.session_ttl;
    let (store, report) = SessionStore::open(tree, store_config)?;
    ::log::info!(
        "replayed {} events into {} sessions ({} dropped, {} expired, {} unreadable lines)",
        report.events,
        report.sessions,
        report.dropped,
        report.expired,
        report.unreadable_lines
    );
    Ok(AppState::new(store))
}

/// Serves until ctrl-c, compacting the log periodically.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = build_state(&config)?;
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    ::log::info!("listening on {}", listener.local_addr()?);
    println!("listening on http://{}", listener.local_addr()?);

    let period = config
        .session_ttl
        .min(Duration::from_secs(3600))
        .max(Duration::from_secs(1));
    let compactor = state.clone();
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(period);
        ticker.tick().await;
        loop {
            ticker.tick().await;
            if let Ok(store) = compactor.store() {
                match store.compact() {
                    Ok(0) => {}
                    Ok(n) => ::log::info!("expired {n} idle sessions"),
                    Err(e) => ::log::error!("compaction failed: {e}"),
                }
            }
        }
    });

    axum::serve(listener, router(state, config.static_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
