//! HTTP front end for interactive completion sessions.
//!
//! | method | path | body |
//! |---|---|---|
//! | `POST` | `/api/session` | `{problem, order: {kind, params}}` |
//! | `GET` | `/api/session/{id}` | |
//! | `POST` | `/api/session/{id}/command` | `{kind, args}` |
//! | `GET` | `/api/session/{id}/export` | |
//! | `DELETE` | `/api/session/{id}` | |
//! | `POST` | `/api/analyze` | `{problem, property, options}` |
//!
//! Terms always travel as strings in the prefix syntax of the problem format.
//! Errors are `{"error": {"code", "message", "detail"}}`.

mod error;
pub mod sessions;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use termlab_core::completion::{
    decide_validity, symbols_in_order, Command, CompletionError, CompletionState, OrderParams, ReductionOrder,
    StateView, Status,
};
use termlab_core::confluence::{analyze_confluence, ConfluenceConfig};
use termlab_core::critical::critical_pairs;
use termlab_core::termination::{prove_termination, Method, Template, TerminationConfig};
use termlab_core::{parse_problem, print_trs, Equation, ProblemFile};
use termlab_core::budget::Deadline;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::limit::RequestBodyLimitLayer;

pub use error::ApiError;
pub use sessions::SessionStore;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub max_sessions: usize,
    /// Sessions are loaded from and saved to this directory.
    pub persist: Option<PathBuf>,
    /// Origins allowed by CORS; `*` allows any. Empty disables CORS headers.
    pub cors_origins: Vec<String>,
    /// Analyses running concurrently; further requests wait.
    pub analysis_workers: usize,
    pub analysis_timeout: Duration,
    pub max_body_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            max_sessions: 1024,
            persist: None,
            cors_origins: Vec::new(),
            analysis_workers: 4,
            analysis_timeout: Duration::from_secs(10),
            max_body_bytes: 1 << 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub sessions: Arc<SessionStore>,
    analysis: Arc<Semaphore>,
    analysis_timeout: Duration,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        AppState {
            sessions: Arc::new(SessionStore::new(config.max_sessions)),
            analysis: Arc::new(Semaphore::new(config.analysis_workers.max(1))),
            analysis_timeout: config.analysis_timeout,
        }
    }
}

/// The API routes with body limit and optional CORS.
pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let mut app = Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session).delete(delete_session))
        .route("/api/session/{id}/command", post(run_command))
        .route("/api/session/{id}/export", get(export_session))
        .route("/api/analyze", post(analyze))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint") })
        .with_state(state)
        .layer(RequestBodyLimitLayer::new(config.max_body_bytes));
    if !config.cors_origins.is_empty() {
        let origins = if config.cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::any()
        } else {
            AllowOrigin::list(config.cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods([HttpMethod::GET, HttpMethod::POST, HttpMethod::DELETE])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}

/// Serves until Ctrl-C, loading and saving sessions when persistence is on.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(&config);
    if let Some(dir) = &config.persist {
        let (n, skipped) = state.sessions.load_all(dir)?;
        eprintln!("loaded {n} session(s) from {}", dir.display());
        for s in skipped {
            eprintln!("skipped {s}");
        }
    }
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    let app = router(state.clone(), &config);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &config.persist {
        let n = state.sessions.save_all(dir).await?;
        eprintln!("saved {n} session(s) to {}", dir.display());
    }
    Ok(())
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid-request", e.body_text()))
}

fn parse(problem: &str) -> Result<ProblemFile, ApiError> {
    parse_problem(problem).map_err(|e| ApiError::bad_request("parse-error", e.to_string()))
}

async fn health() -> Json<Value> {
    Json(json!({ "ok": true }))
}

/// A session as returned to clients.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionResponse {
    id: String,
    #[serde(flatten)]
    state: StateView,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderRequest {
    kind: String,
    #[serde(default)]
    params: OrderParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    problem: String,
    order: Option<OrderRequest>,
}

/// The equations of a problem; a file with only rules contributes them as
/// equations.
fn problem_equations(p: &ProblemFile) -> Vec<Equation> {
    if p.equations.is_empty() {
        p.rules.iter().map(|r| Equation::new(r.lhs.clone(), r.rhs.clone())).collect()
    } else {
        p.equations.clone()
    }
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = json_body(body)?;
    let p = parse(&req.problem)?;
    let equations = problem_equations(&p);
    if equations.is_empty() {
        return Err(ApiError::bad_request("empty-problem", "the problem has no equations"));
    }
    let (kind, params) = match req.order {
        Some(o) => (o.kind, o.params),
        None => ("kbo".to_string(), OrderParams::default()),
    };
    let order = ReductionOrder::build(&kind, &params, &symbols_in_order(&equations))?;
    let state = CompletionState::new(equations, order)?;
    let view = state.view();
    let (id, _evicted) = app.sessions.insert(state);
    let body = SessionResponse {
        id,
        state: view,
        message: None,
    };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionResponse>, ApiError> {
    let handle = app.sessions.get(&id).ok_or_else(|| ApiError::unknown_session(&id))?;
    let state = handle.lock().await;
    Ok(Json(SessionResponse {
        id,
        state: state.view(),
        message: None,
    }))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if app.sessions.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::unknown_session(&id))
    }
}

async fn run_command(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Command>, JsonRejection>,
) -> Result<Json<SessionResponse>, ApiError> {
    let handle = app.sessions.get(&id).ok_or_else(|| ApiError::unknown_session(&id))?;
    let cmd = json_body(body)?;
    // inferences can be expensive; run them off the async workers while
    // holding the session lock so commands on a session stay serialized
    let mut guard = handle.lock_owned().await;
    let (result, view) = tokio::task::spawn_blocking(move || {
        let result = guard.apply(&cmd);
        (result, guard.view())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?;
    let message = match result {
        Ok(msg) => msg,
        // a failed automatic round is recorded in the history and reported
        // through the state's status
        Err(CompletionError::Stuck(reason)) if view.status == Status::Stuck => format!("stuck: {reason}"),
        Err(e) => return Err(e.into()),
    };
    Ok(Json(SessionResponse {
        id,
        state: view,
        message: Some(message),
    }))
}

async fn export_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = app.sessions.get(&id).ok_or_else(|| ApiError::unknown_session(&id))?;
    let state = handle.lock().await;
    let status = state.status();
    let mut text = String::new();
    if status != Status::Success {
        text.push_str(&format!("(COMMENT completion status: {})\n", status_name(status)));
    }
    text.push_str(&print_trs(&state.trs()));
    Ok((
        [
            (header::CONTENT_TYPE, "text/plain; charset=utf-8"),
            (header::HeaderName::from_static("x-completion-status"), status_name(status)),
        ],
        text,
    )
        .into_response())
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Running => "running",
        Status::Success => "success",
        Status::Stuck => "stuck",
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Property {
    Termination,
    Confluence,
    Cps,
    Validity,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
struct AnalyzeOptions {
    method: Option<String>,
    template: Option<String>,
    max_coeff: Option<u64>,
    dim: Option<usize>,
    /// Loop search depth / join depth.
    depth: Option<usize>,
    timeout_ms: Option<u64>,
    left: Option<String>,
    right: Option<String>,
    fuel: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeRequest {
    problem: String,
    property: Property,
    #[serde(default)]
    options: AnalyzeOptions,
}

fn termination_config(o: &AnalyzeOptions, timeout: Duration) -> Result<TerminationConfig, ApiError> {
    let mut cfg = TerminationConfig::default();
    if let Some(m) = &o.method {
        cfg.method = m
            .parse::<Method>()
            .map_err(|e| ApiError::bad_request("invalid-option", e.to_string()))?;
    }
    if let Some(t) = &o.template {
        cfg.template = Template::parse(t).map_err(|e| ApiError::bad_request("invalid-template", e.to_string()))?;
    }
    if let Some(c) = o.max_coeff {
        cfg.max_coeff = c;
    }
    if let Some(d) = o.dim {
        cfg.matrix_dim = d.clamp(1, 4);
    }
    if let Some(d) = o.depth {
        cfg.loop_depth = d;
    }
    cfg.deadline = Deadline::after(timeout);
    Ok(cfg)
}

fn run_analysis(req: AnalyzeRequest, timeout: Duration) -> Result<Value, ApiError> {
    let p = parse(&req.problem)?;
    let trs = p.trs().map_err(|e| ApiError::bad_request("invalid-rule", e.to_string()))?;
    let o = &req.options;
    let ser = |v: Result<Value, serde_json::Error>| v.map_err(|e| ApiError::internal(e.to_string()));
    match req.property {
        Property::Termination => {
            let cfg = termination_config(o, timeout)?;
            let report =
                prove_termination(&trs, &cfg).map_err(|e| ApiError::bad_request("invalid-template", e.to_string()))?;
            let mut v = ser(serde_json::to_value(&report))?;
            v["text"] = Value::String(report.to_text());
            Ok(v)
        }
        Property::Confluence => {
            let mut cfg = ConfluenceConfig {
                termination: termination_config(o, timeout)?,
                ..ConfluenceConfig::default()
            };
            if let Some(d) = o.depth {
                cfg.join_depth = d;
                cfg.witness_depth = d;
            }
            let report = analyze_confluence(&trs, &cfg);
            let mut v = ser(serde_json::to_value(&report))?;
            v["text"] = Value::String(report.to_text());
            Ok(v)
        }
        Property::Cps => {
            let cps = critical_pairs(&trs);
            Ok(json!({ "count": cps.len(), "criticalPairs": ser(serde_json::to_value(&cps))? }))
        }
        Property::Validity => {
            let (Some(l), Some(r)) = (&o.left, &o.right) else {
                return Err(ApiError::bad_request("invalid-option", "validity needs options.left and options.right"));
            };
            let term = |s: &str| p.parse_term(s).map_err(|e| ApiError::bad_request("parse-error", e.to_string()));
            let v = decide_validity(&trs, &term(l)?, &term(r)?, o.fuel.unwrap_or(100_000));
            ser(serde_json::to_value(&v))
        }
    }
}

async fn analyze(
    State(app): State<AppState>,
    body: Result<Json<AnalyzeRequest>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let req = json_body(body)?;
    let timeout = req
        .options
        .timeout_ms
        .map(Duration::from_millis)
        .unwrap_or(app.analysis_timeout)
        .min(app.analysis_timeout);
    let permit = app
        .analysis
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    // the permit lives as long as the computation, even past a timeout
    let task = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        run_analysis(req, timeout)
    });
    // analyses check their deadline cooperatively; the grace period only
    // catches phases that do not
    match tokio::time::timeout(timeout + Duration::from_secs(2), task).await {
        Ok(joined) => joined.map_err(|e| ApiError::internal(e.to_string()))?.map(Json),
        Err(_) => Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "timeout",
            format!("analysis exceeded {} ms", timeout.as_millis()),
        )),
    }
}
