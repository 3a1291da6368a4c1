use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use opprog_core::opcore::ArgRef;

use crate::platform::{Platform, ServiceError};

pub type SharedPlatform = Arc<Mutex<Platform>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownProblem(_) | ServiceError::UnknownSession(_) | ServiceError::UnknownTask(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::UntrustedAnnotator(_) | ServiceError::OwnSubmission => StatusCode::FORBIDDEN,
            ServiceError::DuplicateVote | ServiceError::TaskClosed | ServiceError::SessionClosed => {
                StatusCode::CONFLICT
            }
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let body = json!({"error": {"code": self.code(), "message": self.to_string()}});
        (status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ServiceError>;

fn lock(state: &SharedPlatform) -> MutexGuard<'_, Platform> {
    state.lock().unwrap_or_else(|e| e.into_inner())
}

fn to_json<T: serde::Serialize>(v: &T) -> ApiResult {
    serde_json::to_value(v)
        .map(Json)
        .map_err(|e| ServiceError::Storage(e.to_string()))
}

fn body<T: serde::de::DeserializeOwned>(
    raw: Result<Json<T>, axum::extract::rejection::JsonRejection>,
) -> Result<T, ServiceError> {
    raw.map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

#[derive(Deserialize)]
struct CreateSession {
    problem_id: String,
    #[serde(default = "anonymous")]
    annotator: String,
}

fn anonymous() -> String {
    "anonymous".into()
}

/// Arguments arrive as tokens (`"n0"`, `"#1"`, `"const_pi"`) or bare numbers.
#[derive(Deserialize)]
#[serde(untagged)]
enum ArgInput {
    Token(String),
    Number(f64),
}

#[derive(Deserialize)]
struct ApplyOp {
    op: String,
    args: Vec<ArgInput>,
}

#[derive(Deserialize)]
struct AnnotatorQuery {
    annotator: String,
}

#[derive(Deserialize)]
struct CastVote {
    annotator: String,
    valid: bool,
}

#[derive(Deserialize)]
struct TestAnswer {
    correct: bool,
}

async fn create_session(
    State(st): State<SharedPlatform>,
    raw: Result<Json<CreateSession>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ServiceError> {
    let req = body(raw)?;
    let mut p = lock(&st);
    let s = p.create_session(&req.problem_id, &req.annotator)?;
    Ok((StatusCode::CREATED, to_json(s)?))
}

async fn get_session(State(st): State<SharedPlatform>, Path(id): Path<String>) -> ApiResult {
    to_json(lock(&st).session(&id)?)
}

async fn apply_op(
    State(st): State<SharedPlatform>,
    Path(id): Path<String>,
    raw: Result<Json<ApplyOp>, axum::extract::rejection::JsonRejection>,
) -> ApiResult {
    let req = body(raw)?;
    let args = req
        .args
        .into_iter()
        .map(|a| match a {
            ArgInput::Token(t) => t.parse::<ArgRef>().map_err(|_| ServiceError::InvalidArgument(t)),
            ArgInput::Number(v) => Ok(ArgRef::Literal(v)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    to_json(lock(&st).apply_operation(&id, &req.op, &args)?)
}

async fn undo(State(st): State<SharedPlatform>, Path(id): Path<String>) -> ApiResult {
    to_json(lock(&st).undo(&id)?)
}

async fn submit(State(st): State<SharedPlatform>, Path(id): Path<String>) -> ApiResult {
    to_json(&lock(&st).submit(&id)?)
}

async fn next_task(
    State(st): State<SharedPlatform>,
    q: Result<Query<AnnotatorQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult {
    let Query(q) = q.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let view = lock(&st).next_validation_task(&q.annotator)?;
    Ok(Json(json!({ "task": view })))
}

async fn vote(
    State(st): State<SharedPlatform>,
    Path(task): Path<String>,
    raw: Result<Json<CastVote>, axum::extract::rejection::JsonRejection>,
) -> ApiResult {
    let req = body(raw)?;
    to_json(lock(&st).cast_vote(&task, &req.annotator, req.valid)?)
}

async fn get_problem(State(st): State<SharedPlatform>, Path(id): Path<String>) -> ApiResult {
    let p = lock(&st);
    let r = p.problem(&id)?;
    Ok(Json(json!({
        "id": r.id,
        "problem": r.problem,
        "options": r.options,
        "category": p.category_of(r),
        "numbers": r.numbers(),
    })))
}

async fn get_registry(State(st): State<SharedPlatform>) -> ApiResult {
    let p = lock(&st);
    let ops: Vec<_> = p.registry().iter().collect();
    let consts: Vec<Value> = p
        .consts()
        .iter()
        .map(|(name, value)| json!({"name": name, "value": value}))
        .collect();
    Ok(Json(json!({"operations": ops, "constants": consts})))
}

async fn get_annotator(State(st): State<SharedPlatform>, Path(id): Path<String>) -> ApiResult {
    to_json(&lock(&st).annotator(&id))
}

async fn test_answer(
    State(st): State<SharedPlatform>,
    Path(id): Path<String>,
    raw: Result<Json<TestAnswer>, axum::extract::rejection::JsonRejection>,
) -> ApiResult {
    let req = body(raw)?;
    to_json(&lock(&st).record_test_answer(&id, req.correct)?)
}

pub fn router(state: SharedPlatform) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/ops", post(apply_op))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/submit", post(submit))
        .route("/validation/next", get(next_task))
        .route("/validation/{task}/vote", post(vote))
        .route("/problems/{id}", get(get_problem))
        .route("/registry", get(get_registry))
        .route("/annotators/{id}", get(get_annotator))
        .route("/annotators/{id}/test-answers", post(test_answer))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(platform: Platform, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Mutex::new(platform)))).await
}
