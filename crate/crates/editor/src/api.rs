use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;

use crate::session::{ListQuery, Session, SessionError};

/// One session per workspace; readers share, mutations serialise.
pub type Shared = Arc<RwLock<Session>>;

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            SessionError::UnknownRule(_) => (StatusCode::NOT_FOUND, "unknown_rule"),
            SessionError::Duplicate(_) => (StatusCode::CONFLICT, "duplicate"),
            SessionError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            SessionError::NoCorpus => (StatusCode::CONFLICT, "no_corpus"),
            SessionError::NoReference => (StatusCode::CONFLICT, "no_reference"),
            SessionError::Data(_) => (StatusCode::UNPROCESSABLE_ENTITY, "data"),
            SessionError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
        };
        (status, Json(json!({ "error": self.0.to_string(), "kind": kind }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// JSON body; an empty body reads as the type's default.
fn body<T: DeserializeOwned + Default>(bytes: &Bytes) -> ApiResult<T> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| SessionError::BadRequest(format!("bad JSON body: {e}")).into())
}

fn query<T: DeserializeOwned>(q: Result<Query<T>, axum::extract::rejection::QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t).map_err(|e| SessionError::BadRequest(e.body_text()).into())
}

pub fn router(session: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/rules", get(list_rules).post(insert_rule))
        .route("/rules/{id}", get(get_rule).delete(delete_rule))
        .route("/rules/{id}/sentences", get(rule_sentences))
        .route("/functors", get(functors))
        .route("/functors/by-arg", get(functors_by_arg))
        .route("/mapping", post(mapping))
        .route("/save", post(save))
        .route("/excluded", get(excluded))
        .route("/hierarchy", post(hierarchy))
        .route("/whiteboard", get(whiteboard).post(add_note))
        .with_state(session)
}

/// Opens the workspace and serves until the process is stopped.
pub fn serve(workspace: &Path, port: u16) -> Result<(), Box<dyn std::error::Error>> {
    let session = Session::open(workspace)?;
    let app = router(Arc::new(RwLock::new(session)));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("serving {} on http://{}", workspace.display(), listener.local_addr()?);
        axum::serve(listener, app).await
    })?;
    Ok(())
}

async fn health(State(s): State<Shared>) -> Json<Value> {
    let s = s.read().await;
    Json(json!({
        "status": "ok",
        "rules": s.len(),
        "dirty": s.is_dirty(),
        "corpus": s.has_corpus(),
        "reference": s.reference_path(),
    }))
}

async fn list_rules(State(s): State<Shared>, q: Result<Query<ListQuery>, axum::extract::rejection::QueryRejection>) -> ApiResult<Json<Value>> {
    let q = query(q)?;
    Ok(Json(json!(s.read().await.list(&q)?)))
}

async fn get_rule(State(s): State<Shared>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<Value>> {
    Ok(Json(json!(s.read().await.get(id)?)))
}

async fn rule_sentences(State(s): State<Shared>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<Value>> {
    let sentences = s.read().await.sentences(id)?;
    Ok(Json(json!({ "id": id, "sentences": sentences })))
}

#[derive(Debug, Default, Deserialize)]
struct InsertBody {
    rule: String,
    #[serde(default)]
    schematic: bool,
    request_id: Option<String>,
}

async fn insert_rule(State(s): State<Shared>, bytes: Bytes) -> ApiResult<Response> {
    let b: InsertBody = body(&bytes)?;
    let mut s = s.write().await;
    if let Some(done) = s.answered(b.request_id.as_deref()) {
        return Ok((StatusCode::CREATED, Json(done)).into_response());
    }
    let id = s.insert(&b.rule, b.schematic)?;
    let out = json!(s.get(id)?);
    s.remember(b.request_id.as_deref(), &out);
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct RequestId {
    request_id: Option<String>,
}

async fn delete_rule(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<u64>,
    q: Result<Query<RequestId>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Json<Value>> {
    let q = query(q)?;
    let mut s = s.write().await;
    if let Some(done) = s.answered(q.request_id.as_deref()) {
        return Ok(Json(done));
    }
    let removed = s.delete(id)?;
    let out = json!({ "deleted": id, "rule": removed.rule.to_clause(), "rules": s.len() });
    s.remember(q.request_id.as_deref(), &out);
    Ok(Json(out))
}

async fn functors(State(s): State<Shared>) -> Json<Value> {
    Json(json!({ "functors": s.read().await.functors() }))
}

#[derive(Debug, Deserialize)]
struct SortQuery {
    sort: String,
}

async fn functors_by_arg(State(s): State<Shared>, q: Result<Query<SortQuery>, axum::extract::rejection::QueryRejection>) -> ApiResult<Json<Value>> {
    let q = query(q)?;
    let preds = s.read().await.functors_by_arg(&q.sort)?;
    Ok(Json(json!({ "sort": q.sort, "functors": preds })))
}

#[derive(Debug, Default, Deserialize)]
struct MappingBody {
    reference: Option<String>,
    #[serde(default)]
    closure: bool,
}

async fn mapping(State(s): State<Shared>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let b: MappingBody = body(&bytes)?;
    Ok(Json(json!(s.write().await.run_mapping(b.reference.as_deref(), b.closure)?)))
}

#[derive(Debug, Default, Deserialize)]
struct PathBody {
    path: Option<String>,
}

async fn save(State(s): State<Shared>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let b: PathBody = body(&bytes)?;
    let mut s = s.write().await;
    let p = s.save(b.path.as_deref())?;
    Ok(Json(json!({ "path": p.display().to_string(), "rules": s.len() })))
}

async fn excluded(State(s): State<Shared>) -> Json<Value> {
    let s = s.read().await;
    Json(json!({ "excluded": s.excluded().0.iter().collect::<Vec<_>>() }))
}

async fn hierarchy(State(s): State<Shared>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let b: PathBody = body(&bytes)?;
    let path = b.path.ok_or_else(|| SessionError::BadRequest("missing `path`".into()))?;
    let mut s = s.write().await;
    s.set_hierarchy(&path)?;
    Ok(Json(json!({ "path": path, "sorts": s.hierarchy().len() })))
}

async fn whiteboard(State(s): State<Shared>) -> Json<Value> {
    Json(json!({ "notes": s.read().await.whiteboard() }))
}

#[derive(Debug, Default, Deserialize)]
struct NoteBody {
    text: String,
    sentence: Option<u64>,
    rule: Option<u64>,
    request_id: Option<String>,
}

async fn add_note(State(s): State<Shared>, bytes: Bytes) -> ApiResult<Response> {
    let b: NoteBody = body(&bytes)?;
    let mut s = s.write().await;
    if let Some(done) = s.answered(b.request_id.as_deref()) {
        return Ok((StatusCode::CREATED, Json(done)).into_response());
    }
    let note = s.add_note(&b.text, b.sentence, b.rule)?;
    let out = json!(note);
    s.remember(b.request_id.as_deref(), &out);
    Ok((StatusCode::CREATED, Json(out)).into_response())
}
