use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use termlab_core::parse_problem;
use termlab_service::{router, AppState, ServiceConfig};
use tower::ServiceExt;

fn genes() -> String {
    std::fs::read_to_string(format!("{}/../../corpus/genes.trs", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn app_with(config: ServiceConfig) -> (Router, AppState) {
    let state = AppState::new(&config);
    (router(state.clone(), &config), state)
}

fn app() -> Router {
    app_with(ServiceConfig::default()).0
}

async fn send_raw(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, axum::http::HeaderMap) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec(), headers)
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = send_raw(app, method, uri, body).await;
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn create(app: &Router, problem: &str, order: Value) -> String {
    let (status, v) = send(app, "POST", "/api/session", Some(json!({ "problem": problem, "order": order }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

async fn command(app: &Router, id: &str, cmd: Value) -> (StatusCode, Value) {
    send(app, "POST", &format!("/api/session/{id}/command"), Some(cmd)).await
}

fn assert_error_shape(v: &Value, code: &str) {
    let e = &v["error"];
    assert_eq!(e["code"], code, "{v}");
    assert!(e["message"].is_string());
    assert!(e.get("detail").is_some());
}

#[tokio::test]
async fn create_returns_state_with_string_terms() {
    let app = app();
    let (status, v) = send(
        &app,
        "POST",
        "/api/session",
        Some(json!({ "problem": genes(), "order": { "kind": "kbo", "params": {} } })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let id = v["id"].as_str().unwrap();
    assert_eq!(id.len(), 32);
    assert!(id.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(v["status"], "running");
    assert_eq!(v["historyLength"], 0);
    assert_eq!(v["rules"], json!([]));
    let eqs = v["equations"].as_array().unwrap();
    assert_eq!(eqs.len(), 5);
    assert_eq!(eqs[0], json!({ "id": "e1", "lhs": "T(C(A(T(x))))", "rhs": "T(x)" }));

    let (status, got) = send(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(got, v);
}

#[tokio::test]
async fn ids_are_distinct() {
    let app = app();
    let mut ids = std::collections::HashSet::new();
    for _ in 0..20 {
        assert!(ids.insert(create(&app, &genes(), json!({ "kind": "lpo" })).await));
    }
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let (s, v) = send(&app, "GET", "/api/session/0123456789abcdef0123456789abcdef", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_shape(&v, "unknown-session");

    let (s, v) = command(&app, "nope", json!({ "kind": "undo" })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_shape(&v, "unknown-session");

    let (s, v) = send(&app, "POST", "/api/session", Some(json!({ "problem": "(RULES f(x -> x)" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "parse-error");

    let (s, v) = send(
        &app,
        "POST",
        "/api/session",
        Some(json!({ "problem": genes(), "order": { "kind": "rpo" } })),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "invalid-order");

    let id = create(&app, "(VAR x)(EQUATIONS f(x) == x  a == b)", json!({ "kind": "lpo" })).await;
    // nothing to undo
    let (s, v) = command(&app, &id, json!({ "kind": "undo" })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "empty-history");
    // x -> f(x) violates the variable condition
    let (s, v) = command(&app, &id, json!({ "kind": "orient", "args": { "equation": "e1", "direction": "rl" } })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "variable-violation");
    assert!(v["error"]["detail"]["reason"].is_string());
    // f(x) -> x is fine
    let (s, v) = command(&app, &id, json!({ "kind": "orient", "args": { "equation": "e1", "direction": "lr" } })).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    // unknown ids inside a known session
    let (s, v) = command(&app, &id, json!({ "kind": "delete", "args": { "equation": "e9" } })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_shape(&v, "unknown-equation");
    // delete on a non-trivial equation
    let (s, v) = command(&app, &id, json!({ "kind": "delete", "args": { "equation": "e2" } })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "not-applicable");
    // malformed command
    let (s, v) = command(&app, &id, json!({ "kind": "fly" })).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "invalid-request");

    let (s, v) = send(&app, "GET", "/api/nothing", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_shape(&v, "not-found");
}

#[tokio::test]
async fn undo_restores_the_exact_state() {
    let app = app();
    let id = create(&app, &genes(), json!({ "kind": "kbo" })).await;
    let (_, initial) = send(&app, "GET", &format!("/api/session/{id}"), None).await;
    let mut states = vec![initial];
    for _ in 0..5 {
        let (s, v) = command(&app, &id, json!({ "kind": "auto_step" })).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["historyLength"], states.len());
        states.push(v);
    }
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("message");
        v
    };
    while states.len() > 1 {
        states.pop();
        let (s, v) = command(&app, &id, json!({ "kind": "undo" })).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(strip(v), strip(states.last().unwrap().clone()));
    }
}

#[tokio::test]
async fn gene_completion_end_to_end() {
    let app = app();
    let id = create(&app, &genes(), json!({ "kind": "kbo", "params": {} })).await;
    let mut last = Value::Null;
    for round in 1..=200 {
        let (s, v) = command(&app, &id, json!({ "kind": "auto_step" })).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["historyLength"], round);
        last = v;
        if last["status"] != "running" {
            break;
        }
    }
    assert_eq!(last["status"], "success");
    assert_eq!(last["equations"], json!([]));
    let rules = last["rules"].as_array().unwrap();
    assert_eq!(rules.len(), 6);
    assert!(rules.iter().all(|r| r["lhs"].is_string() && r["rhs"].is_string()));

    // a completed session refuses further automatic rounds
    let (s, v) = command(&app, &id, json!({ "kind": "auto_step" })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "not-applicable");

    let (s, bytes, headers) = send_raw(&app, "GET", &format!("/api/session/{id}/export"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(headers["x-completion-status"], "success");
    let exported = String::from_utf8(bytes).unwrap();
    let trs = parse_problem(&exported).unwrap().trs().unwrap();
    assert_eq!(trs.rules().len(), 6);

    let word = |w: &str| w.chars().rev().fold("e".to_string(), |acc, c| format!("{c}({acc})"));
    let (milk, cola, virus) = (word("TAGCTAGCTAGCT"), word("CTGACTGACT"), word("CTGCTACTGACT"));
    let query = |l: &str, r: &str| {
        json!({ "problem": exported, "property": "validity", "options": { "left": l, "right": r } })
    };
    let (s, v) = send(&app, "POST", "/api/analyze", Some(query(&milk, &cola))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["valid"], true);
    assert_eq!(v["leftNormalForm"], "T(e)");
    let (_, v) = send(&app, "POST", "/api/analyze", Some(query(&milk, &virus))).await;
    assert_eq!(v["valid"], false);
    assert_eq!(v["rightNormalForm"], "T(G(T(e)))");
}

#[tokio::test]
async fn stuck_sessions_report_the_failure() {
    let app = app();
    let id = create(&app, "(VAR x y)(EQUATIONS f(x,y) == f(y,x))", json!({ "kind": "lpo" })).await;
    let (s, v) = command(&app, &id, json!({ "kind": "auto_step" })).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "stuck");
    assert_eq!(v["historyLength"], 1);
    assert!(v["failure"].as_str().unwrap().contains("f(x,y)"));
    let (s, v) = command(&app, &id, json!({ "kind": "auto_step" })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "not-applicable");
    let (_, bytes, headers) = send_raw(&app, "GET", &format!("/api/session/{id}/export"), None).await;
    assert_eq!(headers["x-completion-status"], "stuck");
    assert!(parse_problem(&String::from_utf8(bytes).unwrap()).is_ok());
    let (s, v) = command(&app, &id, json!({ "kind": "undo" })).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "running");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_commands_are_serialized() {
    let app = app();
    let id = create(&app, &genes(), json!({ "kind": "kbo" })).await;
    let other = create(&app, &genes(), json!({ "kind": "lpo" })).await;
    let mut tasks = Vec::new();
    for k in 0..16 {
        let app = app.clone();
        let id = if k % 4 == 0 { other.clone() } else { id.clone() };
        tasks.push(tokio::spawn(async move { command(&app, &id, json!({ "kind": "auto_step" })).await }));
    }
    let mut lengths = Vec::new();
    for t in tasks {
        let (s, v) = t.await.unwrap();
        assert_eq!(s, StatusCode::OK, "{v}");
        if v["id"] == json!(id) {
            lengths.push(v["historyLength"].as_u64().unwrap());
        }
    }
    lengths.sort();
    assert_eq!(lengths, (1..=12).collect::<Vec<u64>>());
    let (_, v) = send(&app, "GET", &format!("/api/session/{other}"), None).await;
    assert_eq!(v["historyLength"], 4);
}

#[tokio::test]
async fn capacity_evicts_the_oldest_session() {
    let (app, state) = app_with(ServiceConfig {
        max_sessions: 3,
        ..ServiceConfig::default()
    });
    let mut ids = Vec::new();
    for _ in 0..5 {
        ids.push(create(&app, &genes(), json!({ "kind": "kbo" })).await);
    }
    assert_eq!(state.sessions.len(), 3);
    for (k, id) in ids.iter().enumerate() {
        let (s, _) = send(&app, "GET", &format!("/api/session/{id}"), None).await;
        assert_eq!(s == StatusCode::OK, k >= 2);
    }
    let (s, _) = send(&app, "DELETE", &format!("/api/session/{}", ids[4]), None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    assert_eq!(state.sessions.len(), 2);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (app, state) = app_with(ServiceConfig::default());
    let id = create(&app, &genes(), json!({ "kind": "kbo" })).await;
    for _ in 0..3 {
        command(&app, &id, json!({ "kind": "auto_step" })).await;
    }
    let (_, before) = send(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(state.sessions.save_all(dir.path()).await.unwrap(), 1);

    let (app2, state2) = app_with(ServiceConfig::default());
    std::fs::write(dir.path().join("garbage.json"), "{").unwrap();
    let (loaded, skipped) = state2.sessions.load_all(dir.path()).unwrap();
    assert_eq!((loaded, skipped.len()), (1, 1));
    let (s, after) = send(&app2, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after, before);
    // the restored history still undoes
    let (s, v) = command(&app2, &id, json!({ "kind": "undo" })).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["historyLength"], 2);
}

#[tokio::test]
async fn analyses() {
    let app = app();
    let beans = "(VAR x)(RULES b(b(x)) -> w(x)  w(w(x)) -> w(x)  b(w(x)) -> b(x)  w(b(x)) -> b(x))";
    let (s, v) = send(&app, "POST", "/api/analyze", Some(json!({ "problem": beans, "property": "termination" }))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["answer"], "YES");
    assert_eq!(v["perRuleEvidence"].as_array().unwrap().len(), 4);
    assert!(v["text"].as_str().unwrap().starts_with("YES"));

    let (_, v) = send(&app, "POST", "/api/analyze", Some(json!({ "problem": beans, "property": "cps" }))).await;
    assert_eq!(v["count"], 8);
    assert!(v["criticalPairs"][0]["left"].is_string());

    let (_, v) = send(&app, "POST", "/api/analyze", Some(json!({ "problem": beans, "property": "confluence" }))).await;
    assert_eq!(v["verdict"], "YES");

    let r2 = std::fs::read_to_string(format!("{}/../../corpus/beans2.trs", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let (_, v) = send(
        &app,
        "POST",
        "/api/analyze",
        Some(json!({ "problem": r2, "property": "termination", "options": { "method": "poly", "template": "b = 4*x1 + _" } })),
    )
    .await;
    assert_eq!(v["answer"], "YES", "{v}");

    let (s, v) = send(
        &app,
        "POST",
        "/api/analyze",
        Some(json!({ "problem": beans, "property": "termination", "options": { "method": "magic" } })),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "invalid-option");

    let (s, v) = send(&app, "POST", "/api/analyze", Some(json!({ "problem": beans, "property": "beauty" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "invalid-request");
}

#[tokio::test]
async fn analysis_timeouts_degrade_to_maybe() {
    let (app, _) = app_with(ServiceConfig {
        analysis_timeout: Duration::from_millis(1),
        ..ServiceConfig::default()
    });
    let shuffle = std::fs::read_to_string(format!("{}/../../corpus/shuffle.trs", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let (s, v) = send(
        &app,
        "POST",
        "/api/analyze",
        Some(json!({ "problem": shuffle, "property": "termination", "options": { "method": "matrix", "dim": 3 } })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["answer"], "MAYBE");
}

#[tokio::test]
async fn cors_is_opt_in() {
    let preflight = |app: Router| async move {
        let req = Request::builder()
            .method("OPTIONS")
            .uri("/api/session")
            .header("origin", "http://localhost:5173")
            .header("access-control-request-method", "POST")
            .body(Body::empty())
            .unwrap();
        app.oneshot(req).await.unwrap()
    };
    let resp = preflight(app()).await;
    assert!(resp.headers().get("access-control-allow-origin").is_none());
    let (app, _) = app_with(ServiceConfig {
        cors_origins: vec!["http://localhost:5173".into()],
        ..ServiceConfig::default()
    });
    let resp = preflight(app).await;
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
}
