//! Session-oriented HTTP JSON API.
//!
//! - `POST /sessions` with a QP (JSON, text, or `{"text": ...}`) creates a session.
//! - `GET /sessions/{id}?panel=homology,phi,degree0` returns the current state.
//! - `POST /sessions/{id}/mutate` with `{"vertex": name}` mutates.
//! - `POST /sessions/{id}/undo` drops the last snapshot.
//! - `GET /sessions/{id}/export?format=qp|json|dot` returns the full QP.
//!
//! Commands on one session run one at a time. Accepted commands can be
//! appended to a JSON-lines log and replayed on restart.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{Mutex, RwLock};

use crate::dgmod::phi_interval;
use crate::field::Rational;
use crate::format::{self, ParseError};
use crate::ginzburg::{degree0_criterion, truncation_homology, GinzburgAlgebra};
use crate::mutation::{arrow_counts, mutate_checked, ArrowOrigin, MutationDelta};
use crate::qp::{check_mutable, jacobian_dims, validate_qp, Accuracy, Qp, QpError};

type K = Rational;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Truncation used when the input does not set one.
    pub default_truncation: usize,
    /// Append-only log of accepted commands.
    pub persistence: Option<PathBuf>,
    /// Potential terms longer than this are not shown in states.
    pub display_max_len: usize,
    pub display_max_terms: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { default_truncation: format::DEFAULT_TRUNCATION, persistence: None, display_max_len: 8, display_max_terms: 200 }
    }
}

#[derive(Clone, Debug)]
struct Snapshot {
    qp: Qp<K>,
    /// `None` for the loaded QP.
    vertex: Option<String>,
    names: Vec<ArrowOrigin>,
    delta: Option<MutationDelta>,
}

#[derive(Debug)]
struct Session {
    id: String,
    history: Vec<Snapshot>,
}

/// One line of the persistence log.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum LogEntry {
    Create { id: String, qp: format::QpJson },
    Mutate { id: String, vertex: String },
    Undo { id: String },
}

pub struct AppState {
    config: ServerConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    log: Option<StdMutex<std::fs::File>>,
}

/// An error response: status plus `{"error": ..., "diagnostics": [...]}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<format::Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), diagnostics: Vec::new() }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`"))
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let message = match e.diagnostics.as_slice() {
            [d] => d.message.clone(),
            _ => e.to_string(),
        };
        ApiError { status: StatusCode::BAD_REQUEST, message, diagnostics: e.diagnostics }
    }
}

impl From<crate::Error> for ApiError {
    fn from(e: crate::Error) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.message, "diagnostics": self.diagnostics}))).into_response()
    }
}

fn mutation_error(e: QpError) -> ApiError {
    let status = match e {
        QpError::LoopAtVertex(_) | QpError::TwoCycleAtVertex(_) => StatusCode::CONFLICT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    };
    ApiError::new(status, e.to_string())
}

fn accuracy_json(a: Accuracy) -> Value {
    match a {
        Accuracy::Exact => json!("exact"),
        Accuracy::UpTo(w) => json!(w),
    }
}

impl AppState {
    pub fn new(config: ServerConfig) -> std::io::Result<Arc<Self>> {
        let mut state = AppState { config, sessions: RwLock::new(HashMap::new()), log: None };
        if let Some(path) = state.config.persistence.clone() {
            let sessions = replay(&path)?;
            state.sessions = RwLock::new(sessions.into_iter().map(|s| (s.id.clone(), Arc::new(Mutex::new(s)))).collect());
            let f = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
            state.log = Some(StdMutex::new(f));
        }
        Ok(Arc::new(state))
    }

    fn append(&self, entry: &LogEntry) -> Result<(), ApiError> {
        let Some(log) = &self.log else { return Ok(()) };
        let mut f = log.lock().map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "log poisoned"))?;
        let line = serde_json::to_string(entry).expect("plain data serializes");
        writeln!(f, "{line}").map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("log write failed: {e}")))
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.read().await.get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }
}

/// Re-runs a persistence log from the start.
fn replay(path: &FsPath) -> std::io::Result<Vec<Session>> {
    let mut sessions: Vec<Session> = Vec::new();
    let Ok(f) = std::fs::File::open(path) else { return Ok(sessions) };
    let bad = |m: String| std::io::Error::new(std::io::ErrorKind::InvalidData, m);
    for (ln, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry = serde_json::from_str(&line).map_err(|e| bad(format!("log line {}: {e}", ln + 1)))?;
        match entry {
            LogEntry::Create { id, qp } => {
                let qp = format::from_json_value::<K>(&qp).map_err(|e| bad(format!("log line {}: {e}", ln + 1)))?;
                sessions.push(Session { id, history: vec![initial(qp)] });
            }
            LogEntry::Mutate { id, vertex } => {
                let s = sessions.iter_mut().find(|s| s.id == id).ok_or_else(|| bad(format!("log line {}: unknown session", ln + 1)))?;
                let snap = mutate_snapshot(s.history.last().expect("history nonempty"), &vertex)
                    .map_err(|e| bad(format!("log line {}: {}", ln + 1, e.message)))?;
                s.history.push(snap);
            }
            LogEntry::Undo { id } => {
                let s = sessions.iter_mut().find(|s| s.id == id).ok_or_else(|| bad(format!("log line {}: unknown session", ln + 1)))?;
                if s.history.len() > 1 {
                    s.history.pop();
                }
            }
        }
    }
    Ok(sessions)
}

fn initial(qp: Qp<K>) -> Snapshot {
    Snapshot { qp, vertex: None, names: Vec::new(), delta: None }
}

fn mutate_snapshot(prev: &Snapshot, vertex: &str) -> Result<Snapshot, ApiError> {
    let q = &prev.qp;
    let i = q.vertex(vertex).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, format!("unknown vertex `{vertex}`")))?;
    check_mutable(q, i).map_err(mutation_error)?;
    let r = mutate_checked(q, i).map_err(mutation_error)?;
    let delta = r.delta(q);
    Ok(Snapshot { qp: r.result().clone(), vertex: Some(vertex.to_string()), names: r.names, delta: Some(delta) })
}

/// Parses a request body: QP JSON, `{"text": ..., "truncation": N}`, or text.
fn parse_body(body: &str, config: &ServerConfig) -> Result<Qp<K>, ApiError> {
    let trimmed = body.trim_start();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(body).map_err(|e| {
            ApiError::from(ParseError {
                diagnostics: vec![format::Diagnostic {
                    kind: format::DiagnosticKind::Syntax,
                    line: e.line(),
                    col: e.column(),
                    message: e.to_string(),
                    token: String::new(),
                }],
            })
        })?;
        if let Some(text) = v.get("text").and_then(Value::as_str) {
            let q = with_default_truncation(text, config)?;
            return match v.get("truncation").and_then(Value::as_u64) {
                Some(n) => q.with_truncation(n as usize).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string())),
                None => Ok(q),
            };
        }
        let mut j: Value = v;
        if j.get("truncation").is_none() {
            j["truncation"] = json!(config.default_truncation);
        }
        let qj: format::QpJson = serde_json::from_value(j).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
        return Ok(format::from_json_value(&qj)?);
    }
    with_default_truncation(body, config)
}

fn with_default_truncation(text: &str, config: &ServerConfig) -> Result<Qp<K>, ApiError> {
    let has_truncation = text.lines().any(|l| l.split('#').next().unwrap_or("").split_whitespace().next() == Some("truncation"));
    if has_truncation || config.default_truncation == format::DEFAULT_TRUNCATION {
        return Ok(format::parse_qp(text)?);
    }
    Ok(format::parse_qp(&format!("{text}\ntruncation {}\n", config.default_truncation))?)
}

fn potential_json(q: &Qp<K>, config: &ServerConfig) -> Value {
    let quiver = q.quiver();
    let mut terms: Vec<(usize, String, String)> =
        q.potential().terms().map(|(p, c)| (p.len(), quiver.path_name(p), c.to_string())).collect();
    let total = terms.len();
    terms.retain(|t| t.0 <= config.display_max_len);
    terms.sort();
    terms.truncate(config.display_max_terms);
    let shown: Vec<Value> = terms.iter().map(|(_, w, c)| json!({"coeff": c, "word": w})).collect();
    json!({
        "terms": shown,
        "total_terms": total,
        "max_len": config.display_max_len,
        "max_terms": config.display_max_terms,
        "complete": shown.len() == total,
    })
}

type Invariants = (Vec<((String, String), usize)>, Vec<usize>);

fn invariants(q: &Qp<K>) -> Invariants {
    let orders = q.truncation().saturating_sub(2).min(q.watermark());
    let dims = jacobian_dims(q, 1..=orders).unwrap_or_default();
    (arrow_counts(q.quiver()).into_iter().collect(), dims)
}

fn state_json(s: &Session, config: &ServerConfig) -> Value {
    let snap = s.history.last().expect("history nonempty");
    let q = &snap.qp;
    let (vertices, arrows) = format::quiver_json(q.quiver());
    let dims = jacobian_dims(q, 1..=q.watermark().min(q.truncation())).unwrap_or_default();
    let involution = match s.history.len() {
        n if n >= 3 && snap.vertex.is_some() && s.history[n - 2].vertex == snap.vertex => {
            let pass = invariants(q) == invariants(&s.history[n - 3].qp);
            json!(if pass { "pass" } else { "fail" })
        }
        _ => Value::Null,
    };
    json!({
        "id": s.id,
        "step": s.history.len() - 1,
        "history": s.history.iter().map(|h| h.vertex.clone().unwrap_or_else(|| "initial".into())).collect::<Vec<_>>(),
        "quiver": {"vertices": vertices, "arrows": arrows},
        "potential": potential_json(q, config),
        "validation": validate_qp(q),
        "jacobian_dims": dims,
        "order": q.truncation(),
        "accuracy": accuracy_json(q.accuracy()),
        "watermark": q.watermark(),
        "delta": snap.delta,
        "provenance": snap.names,
        "involution": involution,
    })
}

fn panels(q: &Qp<K>, which: &[String]) -> Result<Value, ApiError> {
    let mut out = serde_json::Map::new();
    let n = q.truncation();
    for p in which {
        match p.as_str() {
            "homology" => {
                let g = GinzburgAlgebra::new(q)?;
                let orders: Vec<usize> = (1..=n).collect();
                let table = truncation_homology(&g, &orders, &[-4, -3, -2, -1, 0])?;
                out.insert("homology".into(), json!(table));
            }
            "phi" => {
                let quiver = q.quiver();
                let mut rows = Vec::new();
                for i in quiver.vertices() {
                    if check_mutable(q, i).is_err() {
                        continue;
                    }
                    for j in quiver.vertices() {
                        let iv = phi_interval(q, i, j, n)?;
                        rows.push(json!({"mutated_at": quiver.vertex_name(i), "simple": iv.vertex, "lo": iv.lo, "hi": iv.hi}));
                    }
                }
                out.insert("phi".into(), json!(rows));
            }
            "degree0" => {
                let mut rows = Vec::new();
                for v in q.quiver().vertices() {
                    if q.quiver().has_loop_at(v) {
                        continue;
                    }
                    rows.push(json!(degree0_criterion(q, v, n)?));
                }
                out.insert("degree0".into(), json!(rows));
            }
            other => return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown panel `{other}`"))),
        }
    }
    Ok(Value::Object(out))
}

fn new_id() -> String {
    format!("{:016x}", rand::thread_rng().gen::<u64>())
}

async fn create_session(State(app): State<Arc<AppState>>, body: String) -> Result<Response, ApiError> {
    let qp = parse_body(&body, &app.config)?;
    let mut sessions = app.sessions.write().await;
    let mut id = new_id();
    while sessions.contains_key(&id) {
        id = new_id();
    }
    app.append(&LogEntry::Create { id: id.clone(), qp: format::to_json_value(&qp) })?;
    let s = Session { id: id.clone(), history: vec![initial(qp)] };
    let state = state_json(&s, &app.config);
    sessions.insert(id.clone(), Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(json!({"id": id, "state": state}))).into_response())
}

#[derive(Deserialize)]
struct StateQuery {
    panel: Option<String>,
}

async fn get_state(State(app): State<Arc<AppState>>, Path(id): Path<String>, Query(query): Query<StateQuery>) -> Result<Json<Value>, ApiError> {
    let session = app.session(&id).await?;
    let guard = session.lock().await;
    let mut state = state_json(&guard, &app.config);
    if let Some(p) = query.panel.filter(|p| !p.is_empty()) {
        let which: Vec<String> = p.split(',').map(|s| s.trim().to_string()).collect();
        let q = guard.history.last().expect("history nonempty").qp.clone();
        drop(guard);
        let panels = tokio::task::spawn_blocking(move || panels(&q, &which))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
        state["panels"] = panels;
    }
    Ok(Json(state))
}

#[derive(Deserialize)]
struct MutateBody {
    vertex: String,
}

async fn mutate_session(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: String) -> Result<Json<Value>, ApiError> {
    let req: MutateBody = serde_json::from_str(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("expected {{\"vertex\": ...}}: {e}")))?;
    let session = app.session(&id).await?;
    let mut guard = session.lock_owned().await;
    let prev = guard.history.last().expect("history nonempty").clone();
    let vertex = req.vertex.clone();
    let snap = tokio::task::spawn_blocking(move || mutate_snapshot(&prev, &vertex))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    app.append(&LogEntry::Mutate { id: id.clone(), vertex: req.vertex })?;
    guard.history.push(snap);
    Ok(Json(state_json(&guard, &app.config)))
}

async fn undo_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = app.session(&id).await?;
    let mut guard = session.lock().await;
    if guard.history.len() < 2 {
        return Err(ApiError::new(StatusCode::CONFLICT, "nothing to undo: session is at its initial state"));
    }
    app.append(&LogEntry::Undo { id: id.clone() })?;
    guard.history.pop();
    Ok(Json(state_json(&guard, &app.config)))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export_session(State(app): State<Arc<AppState>>, Path(id): Path<String>, Query(query): Query<ExportQuery>) -> Result<Response, ApiError> {
    let session = app.session(&id).await?;
    let guard = session.lock().await;
    let q = &guard.history.last().expect("history nonempty").qp;
    let (ctype, body) = match query.format.as_deref().unwrap_or("json") {
        "qp" => ("text/plain; charset=utf-8", format::print_qp(q)),
        "json" => ("application/json", format::to_json(q)),
        "dot" => ("text/vnd.graphviz", format::qp_to_dot(q)),
        other => return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown export format `{other}`"))),
    };
    Ok(([(header::CONTENT_TYPE, ctype)], body).into_response())
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/mutate", post(mutate_session))
        .route("/sessions/{id}/undo", post(undo_session))
        .route("/sessions/{id}/export", get(export_session))
        .with_state(app)
}

/// Binds and serves until the process is stopped.
pub async fn serve(bind: &str, config: ServerConfig) -> std::io::Result<()> {
    let app = AppState::new(config)?;
    let listener = tokio::net::TcpListener::bind(bind).await?;
    axum::serve(listener, router(app)).await
}
