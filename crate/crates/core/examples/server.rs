//! The HTTP session API, driven in-process: create a session, mutate twice,
//! read the state with panels, undo.
//!
//! Run `cargo run -- serve` for a real listener.

use axum::body::Body;
use axum::http::Request;
use qpcalc::server::{router, AppState, ServerConfig};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: &str) -> serde_json::Value {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    println!("{method} {uri} -> {status}");
    serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null)
}

#[tokio::main]
async fn main() {
    let app = router(AppState::new(ServerConfig::default()).unwrap());
    let created = call(&app, "POST", "/sessions", "vertices 1 2 3\narrow a 1 2\narrow b 2 3\narrow c 3 1\npotential 1 c.b.a\n").await;
    let id = created["id"].as_str().unwrap().to_string();
    for _ in 0..2 {
        let s = call(&app, "POST", &format!("/sessions/{id}/mutate"), r#"{"vertex": "1"}"#).await;
        println!("  arrows {}, involution {}", s["quiver"]["arrows"], s["involution"]);
    }
    let s = call(&app, "GET", &format!("/sessions/{id}?panel=homology"), "").await;
    println!("  homology panel: {}", s["panels"]["homology"]);
    let s = call(&app, "POST", &format!("/sessions/{id}/undo"), "").await;
    println!("  history after undo: {}", s["history"]);
}
