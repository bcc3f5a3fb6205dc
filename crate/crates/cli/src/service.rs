//! Session-oriented HTTP service over the respond pipeline.
//!
//! All bodies are JSON.
//!
//! | Method | Path | Response |
//! |--------|------|----------|
//! | POST | `/sessions` | `{"id"}` (201) |
//! | POST | `/sessions/{id}/messages` `{"text"}` | [`MessageReply`] |
//! | GET | `/sessions/{id}` | [`Transcript`] |
//! | DELETE | `/sessions/{id}` | 204 |
//! | GET | `/sessions/{id}/trace` | last [`ResponseTrace`] |
//! | GET | `/kg/{entity}?k=` | [`KgNeighbours`] |
//! | GET | `/health` | [`Health`] |
//!
//! Failures return `{"error": {"code", "message", "trace"?}}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rekindle_core::{respond, ConversationSession, DialogueError, Resources, ResponseMode, ResponseTrace, Utterance};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session {0:?} not found")]
    NotFound(String),
    #[error("session {0:?} already exists")]
    Conflict(String),
    #[error("session {0:?} has no reply yet")]
    NoTrace(String),
    #[error("entity {0:?} is not in the knowledge graph")]
    UnknownEntity(String),
    #[error("no candidate reply found")]
    NoReply { trace: Box<ResponseTrace> },
    #[error("{0}")]
    Pipeline(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotFound(_) => "not_found",
            Self::Conflict(_) => "conflict",
            Self::NoTrace(_) => "no_trace",
            Self::UnknownEntity(_) => "unknown_entity",
            Self::NoReply { .. } => "no_reply",
            Self::Pipeline(_) => "pipeline",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::NotFound(_) | Self::NoTrace(_) | Self::UnknownEntity(_) => StatusCode::NOT_FOUND,
            Self::Conflict(_) => StatusCode::CONFLICT,
            Self::NoReply { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            Self::Pipeline(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let trace = match self {
            Self::NoReply { trace } => Some((**trace).clone()),
            _ => None,
        };
        ErrorBody { error: ErrorDetail { code: self.code().to_string(), message: self.to_string(), trace } }
    }
}

impl From<DialogueError> for ServiceError {
    fn from(e: DialogueError) -> Self {
        match e {
            DialogueError::NoReply { trace } => Self::NoReply { trace },
            other => Self::Pipeline(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<ResponseTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageReply {
    pub session_id: String,
    pub reply: String,
    pub mode: ResponseMode,
    pub trace: ResponseTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbour {
    pub entity: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgNeighbours {
    pub entity: String,
    pub neighbours: Vec<Neighbour>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub pairs: usize,
    pub kg_edges: usize,
    pub sessions: usize,
}

#[derive(Debug, Default)]
struct SessionState {
    session: ConversationSession,
    last_trace: Option<ResponseTrace>,
}

type SessionHandle = Arc<Mutex<SessionState>>;

/// Shared pipeline resources plus the live sessions.
///
/// Each session sits behind its own FIFO lock, so messages to one session are
/// answered in arrival order while different sessions proceed in parallel.
#[derive(Debug)]
pub struct ChatService {
    resources: Arc<Resources>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
    auto_create: bool,
    next_id: AtomicU64,
}

impl ChatService {
    pub fn new(resources: Resources, auto_create: bool) -> Self {
        Self {
            resources: Arc::new(resources),
            sessions: RwLock::new(HashMap::new()),
            auto_create,
            next_id: AtomicU64::new(1),
        }
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    /// Creates a session with a fresh id.
    pub fn create_session(&self) -> String {
        let mut map = self.sessions.write().expect("session map poisoned");
        loop {
            let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
            if !map.contains_key(&id) {
                map.insert(id.clone(), new_handle(&id));
                return id;
            }
        }
    }

    pub fn create_named(&self, id: &str) -> Result<(), ServiceError> {
        let mut map = self.sessions.write().expect("session map poisoned");
        if map.contains_key(id) {
            return Err(ServiceError::Conflict(id.to_string()));
        }
        map.insert(id.to_string(), new_handle(id));
        Ok(())
    }

    pub fn delete_session(&self, id: &str) -> Result<(), ServiceError> {
        match self.sessions.write().expect("session map poisoned").remove(id) {
            Some(_) => Ok(()),
            None => Err(ServiceError::NotFound(id.to_string())),
        }
    }

    fn handle(&self, id: &str) -> Result<SessionHandle, ServiceError> {
        if let Some(h) = self.sessions.read().expect("session map poisoned").get(id) {
            return Ok(h.clone());
        }
        if !self.auto_create {
            return Err(ServiceError::NotFound(id.to_string()));
        }
        let mut map = self.sessions.write().expect("session map poisoned");
        Ok(map.entry(id.to_string()).or_insert_with(|| new_handle(id)).clone())
    }

    pub async fn handle_message(&self, session_id: &str, text: &str) -> Result<MessageReply, ServiceError> {
        let handle = self.handle(session_id)?;
        let mut guard = handle.lock_owned().await;
        let resources = self.resources.clone();
        let text = text.to_string();
        let (guard, result) = tokio::task::spawn_blocking(move || {
            let state = &mut *guard;
            let result = respond(&mut state.session, &text, &resources);
            (guard, result)
        })
        .await
        .map_err(|e| ServiceError::Pipeline(format!("worker failed: {e}")))?;
        let mut guard = guard;
        match result {
            Ok((reply, trace)) => {
                guard.last_trace = Some(trace.clone());
                Ok(MessageReply { session_id: session_id.to_string(), reply, mode: trace.mode, trace })
            }
            Err(e) => {
                let err = ServiceError::from(e);
                if let ServiceError::NoReply { trace } = &err {
                    guard.last_trace = Some((**trace).clone());
                }
                Err(err)
            }
        }
    }

    pub async fn transcript(&self, session_id: &str) -> Result<Transcript, ServiceError> {
        let handle = self.handle_existing(session_id)?;
        let guard = handle.lock().await;
        Ok(Transcript { id: session_id.to_string(), utterances: guard.session.utterances().to_vec() })
    }

    pub async fn last_trace(&self, session_id: &str) -> Result<ResponseTrace, ServiceError> {
        let handle = self.handle_existing(session_id)?;
        let guard = handle.lock().await;
        guard.last_trace.clone().ok_or_else(|| ServiceError::NoTrace(session_id.to_string()))
    }

    fn handle_existing(&self, id: &str) -> Result<SessionHandle, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn neighbours(&self, entity: &str, k: usize) -> Result<KgNeighbours, ServiceError> {
        let graph = &self.resources.graph;
        if !graph.contains(entity) {
            return Err(ServiceError::UnknownEntity(entity.to_string()));
        }
        let neighbours = graph
            .related_entities(entity, k)
            .into_iter()
            .map(|(entity, weight)| Neighbour { entity, weight })
            .collect();
        Ok(KgNeighbours { entity: entity.to_string(), neighbours })
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            pairs: self.resources.index.pairs().len(),
            kg_edges: self.resources.graph.num_edges(),
            sessions: self.session_count(),
        }
    }
}

fn new_handle(id: &str) -> SessionHandle {
    Arc::new(Mutex::new(SessionState { session: ConversationSession::new(id), last_trace: None }))
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSession {
    pub id: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct PostMessage {
    pub text: String,
}

#[derive(Debug, Deserialize)]
pub struct KgQuery {
    pub k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Created {
    id: String,
}

const DEFAULT_KG_K: usize = 10;

pub fn router(service: Arc<ChatService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_transcript).delete(delete_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/trace", get(get_trace))
        .route("/kg/{entity}", get(get_kg))
        .with_state(service)
}

async fn health(State(svc): State<Arc<ChatService>>) -> Json<Health> {
    Json(svc.health())
}

async fn create_session(
    State(svc): State<Arc<ChatService>>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<Created>), ServiceError> {
    let id = match body.and_then(|Json(b)| b.id) {
        Some(id) => {
            svc.create_named(&id)?;
            id
        }
        None => svc.create_session(),
    };
    Ok((StatusCode::CREATED, Json(Created { id })))
}

async fn post_message(
    State(svc): State<Arc<ChatService>>,
    Path(id): Path<String>,
    Json(msg): Json<PostMessage>,
) -> Result<Json<MessageReply>, ServiceError> {
    let reply = svc.handle_message(&id, &msg.text).await?;
    tracing::debug!(session = %id, mode = ?reply.mode, "replied");
    Ok(Json(reply))
}

async fn get_transcript(
    State(svc): State<Arc<ChatService>>,
    Path(id): Path<String>,
) -> Result<Json<Transcript>, ServiceError> {
    Ok(Json(svc.transcript(&id).await?))
}

async fn delete_session(
    State(svc): State<Arc<ChatService>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ServiceError> {
    svc.delete_session(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_trace(
    State(svc): State<Arc<ChatService>>,
    Path(id): Path<String>,
) -> Result<Json<ResponseTrace>, ServiceError> {
    Ok(Json(svc.last_trace(&id).await?))
}

async fn get_kg(
    State(svc): State<Arc<ChatService>>,
    Path(entity): Path<String>,
    Query(q): Query<KgQuery>,
) -> Result<Json<KgNeighbours>, ServiceError> {
    Ok(Json(svc.neighbours(&entity, q.k.unwrap_or(DEFAULT_KG_K))?))
}
