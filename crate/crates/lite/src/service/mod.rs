//! HTTP/JSON service for labeling sessions driven by a person.
//!
//! Each session runs the acquisition loop and stops at every row it wants
//! labeled. Sessions are journaled to one append-only file each and
//! replayed on startup.

mod session;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write as _};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lite_core::{Cell, Dataset, Policy, Row};
use serde::Deserialize;
use serde_json::{json, Value};

pub use session::{cell_from_json, cell_json, Event, Session, SessionError, Snapshot, SCHEMA_VERSION};

use crate::io;

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

    fn not_found(what: &str, name: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} `{name}`"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::invalid(e.body_text())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Finished | SessionError::Stale { .. } => ApiError::conflict(e.to_string()),
            SessionError::Invalid(m) => ApiError::invalid(m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "code": self.code, "message": self.message },
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

type Shared<T> = Arc<Mutex<T>>;

struct Inner {
    data_dir: PathBuf,
    state_dir: PathBuf,
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
    sessions: RwLock<BTreeMap<String, Shared<Session>>>,
}

/// Datasets and sessions shared by all requests.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Loads every `.csv` in `data_dir` and replays the journals in
    /// `state_dir`. Files that fail to load are logged and skipped.
    pub fn open(data_dir: &Path, state_dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(data_dir)?;
        fs::create_dir_all(state_dir)?;
        let mut datasets = BTreeMap::new();
        for path in io::csv_files(data_dir)? {
            match io::load(&path) {
                Ok(d) => {
                    datasets.insert(io::dataset_name(&path), Arc::new(d));
                }
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        let state = AppState(Arc::new(Inner {
            data_dir: data_dir.to_path_buf(),
            state_dir: state_dir.to_path_buf(),
            datasets: RwLock::new(datasets),
            sessions: RwLock::new(BTreeMap::new()),
        }));
        state.replay()?;
        Ok(state)
    }

    fn replay(&self) -> anyhow::Result<()> {
        let mut journals: Vec<PathBuf> = fs::read_dir(&self.0.state_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        journals.sort();
        for path in journals {
            match self.replay_one(&path) {
                Ok(s) => {
                    let id = s.id.clone();
                    self.0.sessions.write().unwrap().insert(id, Arc::new(Mutex::new(s)));
                }
                Err(e) => log::warn!("cannot replay {}: {e}", path.display()),
            }
        }
        Ok(())
    }

    fn replay_one(&self, path: &Path) -> anyhow::Result<Session> {
        let mut lines = BufReader::new(File::open(path)?).lines();
        let first = lines.next().ok_or_else(|| anyhow::anyhow!("empty journal"))??;
        let Event::Created {
            session_id,
            dataset,
            policy,
            budget,
            seed,
        } = serde_json::from_str(&first)?
        else {
            anyhow::bail!("journal does not start with a created event");
        };
        let data = self
            .dataset(&dataset)
            .ok_or_else(|| anyhow::anyhow!("dataset `{dataset}` is gone"))?;
        let policy: Policy = policy.parse()?;
        let mut session = Session::start(session_id, dataset, data, policy, budget, seed)?;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(&line)?;
            session.apply(&event)?;
        }
        Ok(session)
    }

    fn dataset(&self, name: &str) -> Option<Arc<Dataset>> {
        self.0.datasets.read().unwrap().get(name).cloned()
    }

    fn session(&self, id: &str) -> Result<Shared<Session>, ApiError> {
        self.0
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn journal_path(&self, id: &str) -> PathBuf {
        self.0.state_dir.join(format!("{id}.jsonl"))
    }

    fn snapshot_path(&self, id: &str) -> PathBuf {
        self.0.state_dir.join(format!("{id}.snapshot.json"))
    }

    fn append(&self, id: &str, events: &[Event]) -> Result<(), ApiError> {
        let write = || -> std::io::Result<()> {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.journal_path(id))?;
            let mut buf = String::new();
            for e in events {
                buf.push_str(&serde_json::to_string(e).expect("events serialize"));
                buf.push('\n');
            }
            f.write_all(buf.as_bytes())?;
            f.sync_data()
        };
        write().map_err(|e| ApiError::internal(format!("journal write failed: {e}")))
    }

    /// Persists the frozen model once a session has finished.
    fn persist_snapshot(&self, session: &Session) -> Result<(), ApiError> {
        let Some(snap) = session.snapshot() else {
            return Ok(());
        };
        let text = serde_json::to_string_pretty(&snap).expect("snapshot serializes");
        fs::write(self.snapshot_path(&session.id), text)
            .map_err(|e| ApiError::internal(format!("snapshot write failed: {e}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/datasets", get(list_datasets).post(upload_dataset))
        .route("/api/sessions", get(list_sessions).post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/candidate", get(get_candidate))
        .route("/api/sessions/{id}/label", post(submit_label))
        .route("/api/sessions/{id}/report", get(get_report))
        .route("/api/sessions/{id}/close", post(close_session))
        .route("/api/sessions/{id}/score", post(score_row))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn dataset_json(name: &str, d: &Dataset) -> Value {
    json!({ "name": name, "rows": d.len(), "columns": session::columns_json(d.header()) })
}

async fn list_datasets(State(state): State<AppState>) -> ApiResult {
    let datasets: Vec<Value> = state
        .0
        .datasets
        .read()
        .unwrap()
        .iter()
        .map(|(name, d)| dataset_json(name, d))
        .collect();
    Ok(Json(json!({ "schema_version": SCHEMA_VERSION, "datasets": datasets })))
}

#[derive(Deserialize)]
struct Upload {
    name: String,
    csv: String,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 64
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

async fn upload_dataset(
    State(state): State<AppState>,
    body: Result<Json<Upload>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Json(upload) = body?;
    if !valid_name(&upload.name) {
        return Err(ApiError::invalid(format!(
            "dataset name `{}` must be 1-64 characters of letters, digits, `_`, `-` or `.`",
            upload.name
        )));
    }
    let data = io::parse_str(&upload.csv).map_err(|e| ApiError::invalid(e.to_string()))?;
    if data.header().y().is_empty() {
        return Err(ApiError::invalid(
            "dataset needs at least one goal column (name ending in `+` or `-`)",
        ));
    }
    let mut datasets = state.0.datasets.write().unwrap();
    if datasets.contains_key(&upload.name) {
        return Err(ApiError::conflict(format!("dataset `{}` already exists", upload.name)));
    }
    fs::write(state.0.data_dir.join(format!("{}.csv", upload.name)), &upload.csv)
        .map_err(|e| ApiError::internal(format!("cannot store dataset: {e}")))?;
    let body = dataset_json(&upload.name, &data);
    datasets.insert(upload.name, Arc::new(data));
    Ok((
        StatusCode::CREATED,
        Json(json!({ "schema_version": SCHEMA_VERSION, "dataset": body })),
    ))
}

#[derive(Deserialize)]
struct CreateSession {
    dataset: String,
    #[serde(default)]
    algorithm: Option<String>,
    #[serde(default)]
    policy: Option<String>,
    budget: usize,
    #[serde(default)]
    seed: Option<u64>,
    /// Answer every request from the dataset's own goals.
    #[serde(default)]
    simulate: bool,
}

fn parse_algorithm(algorithm: Option<&str>, policy: Option<&str>) -> Result<Policy, ApiError> {
    let from_algo = match algorithm.unwrap_or("lite") {
        "lite" => None,
        "lite-certain" => Some(Policy::Certain),
        "lite-uncertain" => Some(Policy::Uncertain),
        other => {
            return Err(ApiError::bad_request(format!(
                "sessions run the lite algorithm only, not `{other}`"
            )))
        }
    };
    let from_policy = policy
        .map(|p| p.parse::<Policy>().map_err(|e| ApiError::bad_request(e.to_string())))
        .transpose()?;
    match (from_algo, from_policy) {
        (Some(a), Some(p)) if a != p => Err(ApiError::bad_request("algorithm and policy disagree")),
        (a, p) => Ok(a.or(p).unwrap_or(Policy::Certain)),
    }
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Json(req) = body?;
    let policy = parse_algorithm(req.algorithm.as_deref(), req.policy.as_deref())?;
    let data = state
        .dataset(&req.dataset)
        .ok_or_else(|| ApiError::not_found("dataset", &req.dataset))?;
    if req.budget > data.len() {
        return Err(ApiError::bad_request(format!(
            "budget {} exceeds the {} rows of `{}`",
            req.budget,
            data.len(),
            req.dataset
        )));
    }
    let seed = req.seed.unwrap_or_else(rand::random);
    let id = uuid::Uuid::new_v4().simple().to_string();
    let mut session = Session::start(id.clone(), req.dataset, data, policy, req.budget, seed)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;

    let mut events = vec![session.created_event()];
    if req.simulate {
        while !session.is_finished() {
            let (row_id, goals) = session
                .true_goals()
                .ok_or_else(|| ApiError::invalid("dataset lacks goal values to simulate with"))?;
            session.label(row_id, &goals)?;
            events.push(Event::Labeled { row_id, goals });
        }
    }
    state.append(&id, &events)?;
    state.persist_snapshot(&session)?;
    let body = session.summary();
    state
        .0
        .sessions
        .write()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn list_sessions(State(state): State<AppState>) -> ApiResult {
    let sessions: Vec<Value> = state
        .0
        .sessions
        .read()
        .unwrap()
        .values()
        .map(|s| {
            let s = s.lock().unwrap();
            json!({
                "session_id": s.id,
                "dataset": s.dataset,
                "policy": s.policy.name(),
                "budget": s.budget,
                "state": s.state(),
                "labels_used": s.labels_used(),
            })
        })
        .collect();
    Ok(Json(json!({ "schema_version": SCHEMA_VERSION, "sessions": sessions })))
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    Ok(Json(s.summary()))
}

async fn get_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    let candidate = s
        .candidate()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no_candidate", "session is finished"))?;
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "session_id": s.id,
        "state": s.state(),
        "candidate": candidate,
    })))
}

#[derive(Deserialize)]
struct Label {
    row_id: usize,
    goals: Vec<Value>,
}

fn goal_values(goals: &[Value]) -> Result<Vec<f64>, ApiError> {
    goals
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .filter(|g| g.is_finite())
                .ok_or_else(|| ApiError::invalid(format!("goal {i} must be a finite number, got {v}")))
        })
        .collect()
}

async fn submit_label(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Label>, JsonRejection>,
) -> ApiResult {
    let session = state.session(&id)?;
    let Json(req) = body?;
    let goals = goal_values(&req.goals)?;
    let mut s = session.lock().unwrap();
    s.label(req.row_id, &goals)?;
    state.append(
        &id,
        &[Event::Labeled {
            row_id: req.row_id,
            goals,
        }],
    )?;
    if s.is_finished() {
        state.persist_snapshot(&s)?;
    }
    Ok(Json(s.summary()))
}

async fn get_report(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    Ok(Json(s.report()))
}

async fn close_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = state.session(&id)?;
    let mut s = session.lock().unwrap();
    if !s.is_finished() {
        s.close();
        state.append(&id, &[Event::Closed])?;
        state.persist_snapshot(&s)?;
    }
    Ok(Json(s.summary()))
}

#[derive(Deserialize)]
struct ScoreRequest {
    #[serde(default)]
    row_id: Option<usize>,
    /// Independent values in column order; goals are ignored.
    #[serde(default)]
    x: Option<Vec<Value>>,
}

/// Scores a row with the persisted model of a finished session.
async fn score_row(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<ScoreRequest>, JsonRejection>,
) -> ApiResult {
    let session = state.session(&id)?;
    let Json(req) = body?;
    let path = state.snapshot_path(&id);
    let text = fs::read_to_string(&path)
        .map_err(|_| ApiError::conflict("session has no persisted model yet; finish it first"))?;
    let snap: Snapshot =
        serde_json::from_str(&text).map_err(|e| ApiError::internal(format!("corrupt snapshot: {e}")))?;
    let row = {
        let s = session.lock().unwrap();
        let data = s.data();
        let header = data.header();
        match (req.row_id, req.x) {
            (Some(rid), None) => {
                let mut row = data
                    .rows()
                    .iter()
                    .find(|r| r.id == rid)
                    .cloned()
                    .ok_or_else(|| ApiError::not_found("row", &rid.to_string()))?;
                for &p in header.y() {
                    row.cells[p] = Cell::Missing;
                }
                row
            }
            (None, Some(x)) => {
                if x.len() != header.x().len() {
                    return Err(ApiError::invalid(format!(
                        "expected {} independent values, got {}",
                        header.x().len(),
                        x.len()
                    )));
                }
                let mut cells = vec![Cell::Missing; header.len()];
                for (&p, v) in header.x().iter().zip(&x) {
                    cells[p] = cell_from_json(v).map_err(ApiError::invalid)?;
                }
                Row::new(usize::MAX, cells)
            }
            _ => return Err(ApiError::invalid("give exactly one of `row_id` or `x`")),
        }
    };
    let score = snap.score(&row).map_err(ApiError::internal)?;
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "session_id": id,
        "scores": session::score_json(score),
    })))
}
