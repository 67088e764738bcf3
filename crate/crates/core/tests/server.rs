use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use qpcalc::server::{router, AppState, ServerConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

const C3: &str = "vertices 1 2 3\narrow a 1 2\narrow b 2 3\narrow c 3 1\npotential 1 c.b.a\n";
const K2: &str = "vertices 1 2\narrow a1 1 2\narrow a2 1 2\narrow b1 2 1\narrow b2 2 1\npotential 1 a1.b1.a2.b2\npotential -1 a1.b2.a2.b1\n";

fn app() -> Router {
    router(AppState::new(ServerConfig::default()).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_str(&b).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: &str) -> (String, Value) {
    let (s, v) = call_json(app, "POST", "/sessions", body).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v["state"].clone())
}

fn arrow_multiset(state: &Value) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = state["quiver"]["arrows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["src"].as_str().unwrap().to_string(), a["dst"].as_str().unwrap().to_string()))
        .collect();
    v.sort();
    v
}

#[tokio::test]
async fn create_from_text_and_json() {
    let app = app();
    let (_, state) = create(&app, C3).await;
    assert_eq!(state["quiver"]["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(state["jacobian_dims"], json!([3, 6, 6, 6, 6, 6]));
    assert_eq!(state["order"], 6);
    assert_eq!(state["accuracy"], "exact");
    assert_eq!(state["potential"]["terms"][0]["word"].as_str().unwrap().len(), "c.b.a".len());
    let q = qpcalc::format::to_json(&qpcalc::corpus::c3::<qpcalc::field::Rational>(6));
    let (_, s2) = create(&app, &q).await;
    assert_eq!(s2["jacobian_dims"], state["jacobian_dims"]);
    let wrapped = json!({"text": C3, "truncation": 4}).to_string();
    let (_, s3) = create(&app, &wrapped).await;
    assert_eq!(s3["order"], 4);
}

#[tokio::test]
async fn create_errors() {
    let app = app();
    let (s, v) = call_json(&app, "POST", "/sessions", "vertices 1 2\narrow a 1 2\npotential 1 a.b\n").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["diagnostics"][0]["line"], 3);
    assert_eq!(v["diagnostics"][0]["col"], 15);
    let (s, v) = call_json(&app, "POST", "/sessions", "# empty\n").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "quiver must be non-empty");
    let (s, v) = call_json(&app, "POST", "/sessions", r#"{"vertices": [], "arrows": []}"#).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "quiver must be non-empty");
    let (s, v) = call_json(&app, "POST", "/sessions", "{\"vertices\": [").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["diagnostics"][0]["line"], 1);
}

#[tokio::test]
async fn mutate_twice_and_undo() {
    let app = app();
    let (id, initial) = create(&app, C3).await;
    let (s, once) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
    assert_eq!(s, StatusCode::OK, "{once}");
    assert_eq!(arrow_multiset(&once), [("1".into(), "3".into()), ("2".into(), "1".into())]);
    assert_eq!(once["potential"]["total_terms"], 0);
    assert_eq!(once["delta"]["cancelled"], json!([["b", "[a.c]"]]));
    assert_eq!(once["involution"], Value::Null);

    let (_, twice) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
    assert_eq!(arrow_multiset(&twice), arrow_multiset(&initial));
    assert_eq!(twice["jacobian_dims"], initial["jacobian_dims"]);
    assert_eq!(twice["involution"], "pass");
    assert_eq!(twice["history"], json!(["initial", "1", "1"]));

    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/undo"), "").await;
    assert_eq!(s, StatusCode::OK);
    let (_, back) = call(&app, "POST", &format!("/sessions/{id}/undo"), "").await;
    assert_eq!(back, serde_json::to_string(&initial).unwrap());
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{id}/undo"), "").await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(v["error"].as_str().unwrap().contains("initial"));
}

#[tokio::test]
async fn mutation_refusals() {
    let app = app();
    let (id, _) = create(&app, K2).await;
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(v["error"].as_str().unwrap().contains("two-cycle at vertex"));
    let (s, _) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "7"}"#).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call_json(&app, "POST", "/sessions/nope/mutate", r#"{"vertex": "1"}"#).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&app, "GET", "/sessions/nope", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (id, _) = create(&app, &format!("{C3}accuracy 4\n")).await;
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["watermark"], 3);
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("watermark"));
}

#[tokio::test]
async fn panels() {
    let app = app();
    let (id, state) = create(&app, K2).await;
    let (s, v) = call_json(&app, "GET", &format!("/sessions/{id}?panel=homology,phi,degree0"), "").await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let table = &v["panels"]["homology"];
    let degrees = table["degrees"].as_array().unwrap();
    let row0 = degrees.iter().position(|d| d == 0).unwrap();
    assert_eq!(table["dims"][row0], state["jacobian_dims"]);
    assert!(v["panels"]["phi"].as_array().unwrap().is_empty());
    let d0 = v["panels"]["degree0"].as_array().unwrap();
    assert_eq!(d0.len(), 2);
    assert!(d0.iter().all(|r| r["consistent"] == true));
    let (s, _) = call_json(&app, "GET", &format!("/sessions/{id}?panel=bogus"), "").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (id, _) = create(&app, C3).await;
    let (_, v) = call_json(&app, "GET", &format!("/sessions/{id}?panel=phi"), "").await;
    let phi = v["panels"]["phi"].as_array().unwrap();
    assert_eq!(phi.len(), 9);
    for r in phi {
        if r["mutated_at"] == r["simple"] {
            assert_eq!((r["lo"].as_u64(), r["hi"].as_u64()), (Some(0), Some(0)));
        }
    }
}

#[tokio::test]
async fn export_formats() {
    let app = app();
    let (id, _) = create(&app, C3).await;
    let (s, text) = call(&app, "GET", &format!("/sessions/{id}/export?format=qp"), "").await;
    assert_eq!(s, StatusCode::OK);
    let q: qpcalc::qp::Qp<qpcalc::field::Rational> = qpcalc::format::parse_qp(&text).unwrap();
    assert_eq!(q, qpcalc::corpus::c3(6));
    let (_, js) = call(&app, "GET", &format!("/sessions/{id}/export?format=json"), "").await;
    assert_eq!(qpcalc::format::from_json::<qpcalc::field::Rational>(&js).unwrap(), q);
    let (_, dot) = call(&app, "GET", &format!("/sessions/{id}/export?format=dot"), "").await;
    assert_eq!(dot.matches("->").count(), 3);
    let (s, _) = call(&app, "GET", &format!("/sessions/{id}/export?format=png"), "").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_mutations_are_serialized() {
    let app = app();
    let (id, initial) = create(&app, C3).await;
    let mut handles = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        let uri = format!("/sessions/{id}/mutate");
        handles.push(tokio::spawn(async move { call(&app, "POST", &uri, r#"{"vertex": "1"}"#).await.0 }));
    }
    let mut accepted = 0;
    for h in handles {
        if h.await.unwrap() == StatusCode::OK {
            accepted += 1;
        }
    }
    let (_, state) = call_json(&app, "GET", &format!("/sessions/{id}"), "").await;
    assert_eq!(state["history"].as_array().unwrap().len(), accepted + 1);
    assert_eq!(accepted, 8);
    // an even number of mutations at one vertex returns to the start
    assert_eq!(arrow_multiset(&state), arrow_multiset(&initial));
    assert_eq!(state["involution"], "pass");
}

#[tokio::test]
async fn persistence_replays_history() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sessions.jsonl");
    let config = ServerConfig { persistence: Some(log.clone()), ..Default::default() };
    let state = AppState::new(config.clone()).unwrap();
    let app = router(Arc::clone(&state));
    let (id, _) = create(&app, C3).await;
    for v in ["1", "2", "2"] {
        call(&app, "POST", &format!("/sessions/{id}/mutate"), &json!({"vertex": v}).to_string()).await;
    }
    call(&app, "POST", &format!("/sessions/{id}/undo"), "").await;
    let (_, before) = call(&app, "GET", &format!("/sessions/{id}"), "").await;
    drop(app);
    drop(state);

    let restarted = AppState::new(config).unwrap();
    assert_eq!(restarted.session_count().await, 1);
    let app = router(restarted);
    let (s, after) = call(&app, "GET", &format!("/sessions/{id}"), "").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after, before);
    let lines = std::fs::read_to_string(&log).unwrap().lines().count();
    assert_eq!(lines, 5);
}
