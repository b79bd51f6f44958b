//! HTTP session service. Each session holds a game and a live Algorithm
//! strategy; the client only ever names the vertex Spoiler plays.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tokencolor::catalog::{build_algorithm, graph_catalog, known_bounds, KnownBounds};
use tokencolor::engine::{Game, GameConfig, GameError, GraphSource, Rules, TokenStateJson, Transcript};
use tokencolor::graph::NamedGraph;
use tokencolor::perfection::is_online_perfect;
use tokencolor::strategies::AlgorithmStrategy;

#[derive(Debug, Clone, Copy)]
pub struct ServiceOptions {
    pub max_sessions: usize,
    pub ttl: Duration,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            max_sessions: 256,
            ttl: Duration::from_secs(3600),
        }
    }
}

struct Session {
    algorithm_name: String,
    algorithm: Box<dyn AlgorithmStrategy>,
    game: Game,
    bounds: Option<KnownBounds>,
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

/// In-memory sessions, least recently used first out.
struct SessionStore {
    options: ServiceOptions,
    entries: Mutex<HashMap<String, Entry>>,
}

impl SessionStore {
    fn entries(&self) -> MutexGuard<'_, HashMap<String, Entry>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn expire(&self, entries: &mut HashMap<String, Entry>, now: Instant) {
        let ttl = self.options.ttl;
        entries.retain(|_, e| now.duration_since(e.last_used) < ttl);
    }

    fn insert(&self, session: Session) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = Instant::now();
        let mut entries = self.entries();
        self.expire(&mut entries, now);
        while entries.len() >= self.options.max_sessions {
            let Some(oldest) = entries.iter().min_by_key(|(_, e)| e.last_used).map(|(k, _)| k.clone()) else {
                break;
            };
            entries.remove(&oldest);
        }
        entries.insert(
            id.clone(),
            Entry {
                session: Arc::new(Mutex::new(session)),
                last_used: now,
            },
        );
        id
    }

    fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        let now = Instant::now();
        let mut entries = self.entries();
        self.expire(&mut entries, now);
        let entry = entries.get_mut(id)?;
        entry.last_used = now;
        Some(Arc::clone(&entry.session))
    }

    fn remove(&self, id: &str) -> bool {
        self.entries().remove(id).is_some()
    }
}

type AppState = Arc<SessionStore>;

/// JSON error with a machine-readable code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message.to_string())
    }

    fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", "no such session")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "message": self.message}))).into_response()
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        let (status, code) = match e {
            GameError::WidthViolation(_) => (StatusCode::CONFLICT, "width_violation"),
            GameError::RestrictedViolation(_) => (StatusCode::CONFLICT, "restricted_violation"),
            GameError::InvalidVertex { .. } => (StatusCode::BAD_REQUEST, "invalid_vertex"),
            _ => (StatusCode::BAD_REQUEST, "bad_request"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

/// Parses a body ourselves so every malformed body is a 400.
fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::bad_request)
}

fn lock(session: &Mutex<Session>) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn router(options: ServiceOptions) -> Router {
    let store = Arc::new(SessionStore {
        options,
        entries: Mutex::new(HashMap::new()),
    });
    Router::new()
        .route("/graphs", get(list_graphs))
        .route("/analyze", post(analyze))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/moves", post(play_move))
        .with_state(store)
}

pub async fn serve(host: &str, port: u16, options: ServiceOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(options)).await
}

async fn list_graphs() -> Json<Value> {
    Json(json!(graph_catalog()))
}

async fn analyze(body: Bytes) -> Result<Json<Value>, ApiError> {
    let source: GraphSource = parse(&body)?;
    let result = is_online_perfect(&source.build())
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "too_large", e.to_string()))?;
    Ok(Json(json!(result)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    graph: Option<GraphSource>,
    name: Option<String>,
    param: Option<usize>,
    width: u32,
    #[serde(default)]
    restricted: bool,
    algorithm: String,
    params: Option<Value>,
}

#[derive(Serialize)]
struct SessionView {
    id: String,
    config: GameConfig,
    algorithm: String,
    state: TokenStateJson,
    legal_moves: Vec<usize>,
    colors_used: usize,
    vertex_colors: Vec<Vec<usize>>,
    bounds: Option<KnownBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<Transcript>,
}

fn view(id: String, s: &Session, with_transcript: bool) -> SessionView {
    SessionView {
        id,
        config: s.game.rules().config().clone(),
        algorithm: s.algorithm_name.clone(),
        state: s.game.state().into(),
        legal_moves: s.game.legal_moves(),
        colors_used: s.game.colors_used(),
        vertex_colors: s.game.vertex_colors(),
        bounds: s.bounds,
        transcript: with_transcript.then(|| s.game.transcript()),
    }
}

fn bounds_for(config: &GameConfig) -> Option<KnownBounds> {
    match config.source.named() {
        Some(n) => Some(known_bounds(n, config.width)),
        None => is_online_perfect(&config.graph)
            .ok()
            .filter(|r| r.online_perfect)
            .map(|_| KnownBounds {
                lower: config.width,
                upper: config.width,
            }),
    }
}

async fn create_session(
    State(store): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: CreateSession = parse(&body)?;
    let source = match (req.graph, req.name) {
        (Some(g), None) if req.param.is_none() => g,
        (None, Some(name)) => {
            let named = match req.param {
                Some(p) => NamedGraph::new(&name, Some(p)),
                None => name.parse(),
            };
            GraphSource::Named(named.map_err(ApiError::bad_request)?)
        }
        _ => {
            return Err(ApiError::bad_request(
                "give exactly one of graph, or name with optional param",
            ))
        }
    };
    let config = GameConfig::new(source, req.width, req.restricted).map_err(ApiError::bad_request)?;
    let algorithm = build_algorithm(&req.algorithm, &config, req.params.as_ref()).map_err(ApiError::bad_request)?;
    let session = Session {
        algorithm_name: req.algorithm,
        algorithm,
        bounds: bounds_for(&config),
        game: Game::new(Rules::shared(config)),
    };
    let v = view(String::new(), &session, false);
    let id = store.insert(session);
    Ok((StatusCode::CREATED, Json(SessionView { id, ..v })))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = store.get(&id).ok_or_else(ApiError::not_found)?;
    let s = lock(&session);
    Ok(Json(view(id, &s, true)))
}

async fn delete_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    vertex: usize,
}

#[derive(Serialize)]
struct MoveResponse {
    vertex: usize,
    color: usize,
    state: TokenStateJson,
    legal_moves: Vec<usize>,
    colors_used: usize,
}

async fn play_move(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<MoveResponse>, ApiError> {
    let session = store.get(&id).ok_or_else(ApiError::not_found)?;
    let req: MoveRequest = parse(&body)?;
    let mut guard = lock(&session);
    let s = &mut *guard;
    let rules = Arc::clone(s.game.rules());
    // Legality first, so a rejected move never reaches the strategy.
    rules.apply(s.game.state(), req.vertex, tokencolor::engine::ColorChoice::New)?;
    let choice = s
        .algorithm
        .respond(&rules, s.game.state(), req.vertex)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "strategy_failed", e.to_string()))?;
    let color = s
        .game
        .play(req.vertex, choice)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "strategy_failed", e.to_string()))?;
    Ok(Json(MoveResponse {
        vertex: req.vertex,
        color,
        state: s.game.state().into(),
        legal_moves: s.game.legal_moves(),
        colors_used: s.game.colors_used(),
    }))
}
