//! Routes. Every body carries `schema_version`; the model view is serialized
//! once at startup so repeated reads are byte-identical.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ctxscope_core::chat::{get_file_view, ChatSession, ChatTurn, FileView};
use ctxscope_core::context::{ContextBlock, Origin};
use ctxscope_core::corpus::ItemId;
use ctxscope_core::engine::Engine;
use ctxscope_core::layout::LayoutModel;
use ctxscope_core::subtopics::SubtopicId;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{ApiError, FieldError};
use crate::API_SCHEMA_VERSION;

type SessionSlot = Arc<tokio::sync::Mutex<ChatSession>>;

pub struct AppState {
    engine: Arc<Engine>,
    model_json: Bytes,
    topic_of: HashMap<ItemId, usize>,
    sessions: Mutex<HashMap<String, SessionSlot>>,
    next_session: AtomicU64,
}

impl AppState {
    pub fn new(engine: Engine) -> Arc<Self> {
        let model_json = Bytes::from(serde_json::to_vec(&model_view(&engine)).expect("model view serializes"));
        let topic_of = engine
            .bundle
            .topics
            .iter()
            .flat_map(|t| t.member_ids.iter().map(move |m| (m.clone(), t.id)))
            .collect();
        Arc::new(AppState {
            engine: Arc::new(engine),
            model_json,
            topic_of,
            sessions: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn session(&self, id: &str) -> Result<SessionSlot, ApiError> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("session {id}")))
    }

    /// All sessions, ordered by id, for the shutdown snapshot.
    pub async fn snapshot(&self) -> Vec<ChatSession> {
        let slots: Vec<(String, SessionSlot)> = {
            let map = self.sessions.lock().expect("session map poisoned");
            map.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        let mut out = Vec::with_capacity(slots.len());
        for (_, slot) in slots {
            out.push(slot.lock().await.clone());
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/model", get(get_model))
        .route("/model/layout", get(get_layout))
        .route("/items/{id}", get(get_item))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/context", get(get_context).post(post_context))
        .with_state(state)
}

#[derive(Serialize)]
struct TopicView<'a> {
    id: usize,
    label: &'a str,
    size: usize,
    member_ids: &'a [ItemId],
}

#[derive(Serialize)]
struct ModelView<'a> {
    schema_version: u32,
    corpus_fingerprint: &'a str,
    build_config: &'a ctxscope_core::bundle::BuildConfig,
    embedder: &'a ctxscope_core::bundle::EmbedderInfo,
    topics: Vec<TopicView<'a>>,
    subtopics: &'a [ctxscope_core::subtopics::Subtopic],
    layout: &'a LayoutModel,
    index_stats: &'a ctxscope_core::retrieval::IndexStats,
}

fn model_view(engine: &Engine) -> ModelView<'_> {
    let b = &engine.bundle;
    ModelView {
        schema_version: API_SCHEMA_VERSION,
        corpus_fingerprint: &b.corpus_fingerprint,
        build_config: &b.build_config,
        embedder: &b.embedder,
        topics: b
            .topics
            .iter()
            .map(|t| TopicView {
                id: t.id,
                label: &t.label,
                size: t.member_ids.len(),
                member_ids: &t.member_ids,
            })
            .collect(),
        subtopics: &b.subtopics,
        layout: &b.layout,
        index_stats: &b.index_stats,
    }
}

async fn get_model(State(state): State<Arc<AppState>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], state.model_json.clone()).into_response()
}

#[derive(Serialize)]
struct LayoutView {
    schema_version: u32,
    layout: LayoutModel,
}

async fn get_layout(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<LayoutView>, ApiError> {
    let expanded = match query.get("expanded") {
        None => None,
        Some(raw) => Some(raw.parse::<usize>().map_err(|_| {
            ApiError::invalid(vec![ApiError::field("expanded", format!("expected a topic id, got {raw:?}"))])
        })?),
    };
    let layout = state.engine.bundle.layout_for(expanded)?;
    Ok(Json(LayoutView {
        schema_version: API_SCHEMA_VERSION,
        layout,
    }))
}

#[derive(Serialize)]
struct ItemView {
    schema_version: u32,
    #[serde(flatten)]
    view: FileView,
    topic_id: Option<usize>,
    subtopic_id: Option<SubtopicId>,
}

async fn get_item(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ItemView>, ApiError> {
    let id = ItemId(id);
    let view = get_file_view(&id, &state.engine.corpus)?;
    Ok(Json(ItemView {
        schema_version: API_SCHEMA_VERSION,
        topic_id: state.topic_of.get(&id).copied(),
        subtopic_id: state.engine.subtopic_index.subtopic_of(&id).cloned(),
        view,
    }))
}

#[derive(Serialize)]
struct SessionCreated {
    schema_version: u32,
    session_id: String,
}

async fn create_session(State(state): State<Arc<AppState>>) -> (StatusCode, Json<SessionCreated>) {
    let n = state.next_session.fetch_add(1, Ordering::Relaxed);
    let id = format!("s{n:06}");
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(ChatSession::new(id.clone()))));
    (
        StatusCode::CREATED,
        Json(SessionCreated {
            schema_version: API_SCHEMA_VERSION,
            session_id: id,
        }),
    )
}

/// Parses a JSON object body, rejecting keys outside `allowed`.
fn parse_object(body: &[u8], allowed: &[&str]) -> Result<Map<String, Value>, ApiError> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::invalid(vec![ApiError::field("body", format!("not valid JSON: {e}"))]))?;
    let Value::Object(map) = value else {
        return Err(ApiError::invalid(vec![ApiError::field("body", "expected a JSON object")]));
    };
    let unknown: Vec<FieldError> = map
        .keys()
        .filter(|k| !allowed.contains(&k.as_str()) && k.as_str() != "schema_version")
        .map(|k| ApiError::field(k.clone(), "unknown field"))
        .collect();
    if !unknown.is_empty() {
        return Err(ApiError::invalid(unknown));
    }
    Ok(map)
}

#[derive(Serialize)]
struct TurnView {
    schema_version: u32,
    session_id: String,
    turn_index: usize,
    turn: ChatTurn,
}

async fn post_message(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnView>, ApiError> {
    let slot = state.session(&id)?;
    let map = parse_object(&body, &["text"])?;
    let text = match map.get("text") {
        None => return Err(ApiError::invalid(vec![ApiError::field("text", "is required")])),
        Some(Value::String(s)) if s.trim().is_empty() => {
            return Err(ApiError::invalid(vec![ApiError::field("text", "must not be empty")]))
        }
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ApiError::invalid(vec![ApiError::field("text", "must be a string")])),
    };

    let mut guard = slot.lock().await;
    let mut working = guard.clone();
    let engine = state.engine.clone();
    let (working, result) = tokio::task::spawn_blocking(move || {
        let r = engine.respond(&mut working, &text);
        (working, r)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("turn task failed: {e}")))?;
    let turn = result?;
    *guard = working;
    Ok(Json(TurnView {
        schema_version: API_SCHEMA_VERSION,
        session_id: id,
        turn_index: guard.turns.len() - 1,
        turn,
    }))
}

#[derive(Serialize)]
struct EntryView {
    item_id: ItemId,
    origin: Origin,
    subtopic_id: Option<SubtopicId>,
    topic_id: Option<usize>,
}

#[derive(Serialize)]
struct BlockView {
    created_from_prompt: String,
    digest: String,
    entries: Vec<EntryView>,
    /// Entries per topic: the treemap's highlight counts.
    topic_counts: BTreeMap<usize, usize>,
}

#[derive(Serialize)]
struct ContextView {
    schema_version: u32,
    session_id: String,
    context: Option<BlockView>,
}

fn context_view(state: &AppState, session: &ChatSession) -> ContextView {
    let context = session.context_block.as_ref().map(|block: &ContextBlock| {
        let entries: Vec<EntryView> = block
            .entries
            .iter()
            .map(|e| EntryView {
                item_id: e.item_id.clone(),
                origin: e.origin,
                subtopic_id: state.engine.subtopic_index.subtopic_of(&e.item_id).cloned(),
                topic_id: state.topic_of.get(&e.item_id).copied(),
            })
            .collect();
        let mut topic_counts = BTreeMap::new();
        for t in entries.iter().filter_map(|e| e.topic_id) {
            *topic_counts.entry(t).or_insert(0) += 1;
        }
        BlockView {
            created_from_prompt: block.created_from_prompt.clone(),
            digest: block.digest(),
            entries,
            topic_counts,
        }
    });
    ContextView {
        schema_version: API_SCHEMA_VERSION,
        session_id: session.id.clone(),
        context,
    }
}

async fn get_context(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ContextView>, ApiError> {
    let slot = state.session(&id)?;
    let session = slot.lock().await;
    Ok(Json(context_view(&state, &session)))
}

fn subtopic_list(map: &Map<String, Value>, field: &str, state: &AppState, errors: &mut Vec<FieldError>) -> Vec<SubtopicId> {
    let Some(value) = map.get(field) else {
        return Vec::new();
    };
    let Value::Array(items) = value else {
        errors.push(ApiError::field(field, "must be an array of subtopic ids"));
        return Vec::new();
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, v) in items.iter().enumerate() {
        match v {
            Value::String(s) => {
                let id = SubtopicId(s.clone());
                if state.engine.subtopic_index.members(&id).is_none() {
                    errors.push(ApiError::field(format!("{field}[{i}]"), format!("unknown subtopic id {s:?}")));
                } else {
                    out.push(id);
                }
            }
            _ => errors.push(ApiError::field(format!("{field}[{i}]"), "must be a string")),
        }
    }
    out
}

async fn post_context(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ContextView>, ApiError> {
    let slot = state.session(&id)?;
    let map = parse_object(&body, &["add_subtopics", "remove_subtopics"])?;
    let mut errors = Vec::new();
    let add = subtopic_list(&map, "add_subtopics", &state, &mut errors);
    let remove = subtopic_list(&map, "remove_subtopics", &state, &mut errors);
    if !errors.is_empty() {
        return Err(ApiError::invalid(errors));
    }

    let mut session = slot.lock().await;
    if session.context_block.is_none() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "session has no context block yet; send a message first",
        ));
    }
    session.modify_context(&add, &remove, &state.engine.subtopic_index)?;
    Ok(Json(context_view(&state, &session)))
}
