//! Drives the HTTP API in-process: create a session, answer ten queries as a
//! simulated user, and fetch the estimate.
//!
//! To serve over TCP instead: cargo run --release -- serve --addr 127.0.0.1:8080

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use scalefb::service::{router, ServiceConfig, SessionStore, SetRegistry};
use scalefb::{alignment, noisy_response, Query, SimulatedUser, WeightVector};

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let registry = SetRegistry::with_builtin();
    let set = Arc::clone(registry.get("fetch").unwrap());
    let app = router(Arc::new(SessionStore::in_memory(registry, ServiceConfig::default())));

    let sets = call(&app, "GET", "/sets", None).await;
    println!("sets: {sets}");
    let created = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"set_id": "fetch", "policy": {"kind": "info_gain"}, "sigma": 0.35, "epsilon": 0.1, "seed": 1})),
    )
    .await;
    let id = created["session_id"].as_str().unwrap().to_string();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let user = SimulatedUser::random(set.dimension(), 0.6, 0.35, 0.1, &mut rng).unwrap();
    for _ in 0..10 {
        let view = call(&app, "GET", &format!("/sessions/{id}/query"), None).await;
        let (p, q) = (view["query"]["p"].as_str().unwrap(), view["query"]["q"].as_str().unwrap());
        let mu = noisy_response(&user, &Query::new(p, q), &set, &mut rng).unwrap();
        let ack = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "mu": mu }))).await;
        let w_hat: Vec<f64> = serde_json::from_value(ack["w_hat"].clone()).unwrap();
        let a = alignment(&WeightVector::new(w_hat).unwrap(), &user.w_star).unwrap();
        println!("round {:>2}: {p} vs {q} answered {mu:+.1}, alignment {a:.3}", ack["iteration"]);
    }
    let est = call(&app, "GET", &format!("/sessions/{id}/estimate"), None).await;
    println!("best trajectory: {}", est["best_trajectory"]);
}
