use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use scalefb::queries::{select_info_gain, PolicyKind, QueryPolicy};
use scalefb::service::{router, CreateSession, ServiceConfig, SessionStore, SetRegistry};
use scalefb::{noiseless_response, round_to_grid, Query, SimulatedUser, Trajectory, TrajectorySet, WeightVector};

fn app() -> axum::Router {
    router(Arc::new(SessionStore::in_memory(SetRegistry::with_builtin(), ServiceConfig::default())))
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn create_body(policy: &str) -> Value {
    json!({"set_id": "fetch", "policy": {"kind": policy}, "sigma": 0.35, "epsilon": 0.1, "seed": 3, "samples": 40})
}

fn assert_error(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()), "{body}");
}

#[test]
fn lists_registered_sets() {
    runtime().block_on(async {
        let (status, body) = call(&app(), "GET", "/sets", None).await;
        assert_eq!(status, StatusCode::OK);
        let ids: Vec<&str> = body.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
        assert_eq!(ids, ["fetch", "synthetic10"]);
        assert_eq!(body[0]["dimension"], 8);
        assert_eq!(body[0]["size"], 288);
    });
}

#[test]
fn request_errors_carry_code_and_message() {
    runtime().block_on(async {
        let app = app();
        let mut extra = create_body("random");
        extra["colour"] = json!("red");
        let (status, body) = call(&app, "POST", "/sessions", Some(extra)).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_error(&body, "validation");
        assert!(body["message"].as_str().unwrap().contains("colour"));

        let mut unknown = create_body("random");
        unknown["set_id"] = json!("kitchen");
        let (status, body) = call(&app, "POST", "/sessions", Some(unknown)).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_error(&body, "not_found");
        assert!(body["message"].as_str().unwrap().contains("kitchen"));

        let mut bad_eps = create_body("random");
        bad_eps["epsilon"] = json!(0.0);
        let (status, _) = call(&app, "POST", "/sessions", Some(bad_eps)).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

        let (status, body) = call(&app, "GET", "/sessions/sess-999999/query", None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_error(&body, "not_found");

        let (_, created) = call(&app, "POST", "/sessions", Some(create_body("random"))).await;
        let id = created["session_id"].as_str().unwrap();
        let (status, body) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({"mu": 0.4}))).await;
        assert_eq!(status, StatusCode::CONFLICT);
        assert_error(&body, "conflict");

        call(&app, "GET", &format!("/sessions/{id}/query"), None).await;
        let (status, body) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({"mu": 0.35}))).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_error(&body, "validation");
        let (status, _) =
            call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({"mu": 0.4, "note": "x"}))).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        let (status, ack) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({"mu": 0.4}))).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(ack["iteration"], 1);
        assert_eq!(ack["w_hat"].as_array().unwrap().len(), 8);
    });
}

#[test]
fn query_is_stable_until_answered() {
    runtime().block_on(async {
        let app = app();
        let (status, created) = call(&app, "POST", "/sessions", Some(create_body("info_gain"))).await;
        assert_eq!(status, StatusCode::CREATED);
        let id = created["session_id"].as_str().unwrap();
        let (_, a) = call(&app, "GET", &format!("/sessions/{id}/query"), None).await;
        let (_, b) = call(&app, "GET", &format!("/sessions/{id}/query"), None).await;
        assert_eq!(a, b);
        assert_eq!(a["epsilon"], 0.1);
        assert_eq!(a["grid"].as_array().unwrap().len(), 21);
        assert_eq!(a["trajectories"][0]["id"], a["query"]["p"]);
        assert_eq!(a["trajectories"][1]["id"], a["query"]["q"]);

        let (_, est1) = call(&app, "GET", &format!("/sessions/{id}/estimate"), None).await;
        let (_, est2) = call(&app, "GET", &format!("/sessions/{id}/estimate"), None).await;
        assert_eq!(est1, est2);
        assert_eq!(est1["uninformed"], true);

        call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({"mu": -1.0}))).await;
        let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(state["history"].as_array().unwrap().len(), 1);
        assert_eq!(state["pending_query"], Value::Null);
        let (_, est) = call(&app, "GET", &format!("/sessions/{id}/estimate"), None).await;
        assert_eq!(est["uninformed"], false);
        assert_eq!(est["iteration"], 1);
    });
}

#[test]
fn issued_query_matches_offline_selection() {
    let store = SessionStore::in_memory(SetRegistry::with_builtin(), ServiceConfig::default());
    let set = Arc::clone(SetRegistry::with_builtin().get("fetch").unwrap());
    let id = store
        .create_session(CreateSession {
            set_id: "fetch".into(),
            policy: QueryPolicy::new(PolicyKind::InfoGain).with_budget(500),
            sigma: 0.35,
            epsilon: 0.1,
            seed: Some(17),
            samples: Some(50),
        })
        .unwrap();
    let answers = [0.4, -1.0, 0.0, 0.7];
    for (n, mu) in answers.iter().enumerate() {
        let view = store.next_query(&id).unwrap();
        let state = store.state(&id).unwrap();
        let belief = state.fit(n, Arc::clone(&set)).unwrap();
        let offline = select_info_gain(&belief, 500, 0.1, &mut state.policy_rng(n)).unwrap();
        assert_eq!(Query::new(view.query.p, view.query.q), offline);
        store.submit_feedback(&id, *mu).unwrap();
    }
}

#[test]
fn concurrent_sessions_do_not_interfere() {
    fn drive(store: &SessionStore, seed: u64) -> (Vec<scalefb::FeedbackRecord>, scalefb::service::EstimateView) {
        let id = store
            .create_session(CreateSession {
                set_id: "synthetic10".into(),
                policy: QueryPolicy::new(PolicyKind::MaxRegret),
                sigma: 0.2,
                epsilon: 0.1,
                seed: Some(seed),
                samples: Some(40),
            })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            store.next_query(&id).unwrap();
            let mu = (rng.random_range(-10..=10) as f64) / 10.0;
            store.submit_feedback(&id, mu).unwrap();
        }
        (store.state(&id).unwrap().history, store.get_estimate(&id).unwrap())
    }

    let serial = SessionStore::in_memory(SetRegistry::with_builtin(), ServiceConfig::default());
    let expected = [drive(&serial, 1), drive(&serial, 2)];
    let shared = SessionStore::in_memory(SetRegistry::with_builtin(), ServiceConfig::default());
    let got = std::thread::scope(|s| {
        let a = s.spawn(|| drive(&shared, 1));
        let b = s.spawn(|| drive(&shared, 2));
        [a.join().unwrap(), b.join().unwrap()]
    });
    assert_eq!(got, expected);
}

#[test]
fn restart_restores_pending_query_and_belief() {
    let dir = tempfile::tempdir().unwrap();
    let open = || SessionStore::open(dir.path(), SetRegistry::with_builtin(), ServiceConfig::default()).unwrap();
    let store = open();
    let id = store
        .create_session(CreateSession {
            set_id: "fetch".into(),
            policy: QueryPolicy::new(PolicyKind::InfoGain).with_budget(300),
            sigma: 0.35,
            epsilon: 0.25,
            seed: None,
            samples: Some(50),
        })
        .unwrap();
    for mu in [0.5, -0.25] {
        store.next_query(&id).unwrap();
        store.submit_feedback(&id, mu).unwrap();
    }
    let pending = store.next_query(&id).unwrap();
    let estimate = store.get_estimate(&id).unwrap();
    assert!(store.log_path(&id).unwrap().exists());
    assert!(store.snapshot_path(&id).unwrap().exists());
    drop(store);

    let reopened = open();
    assert_eq!(reopened.next_query(&id).unwrap(), pending);
    assert_eq!(reopened.get_estimate(&id).unwrap(), estimate);
    let next_id = reopened
        .create_session(CreateSession {
            set_id: "fetch".into(),
            policy: QueryPolicy::new(PolicyKind::Random),
            sigma: 0.35,
            epsilon: 0.1,
            seed: None,
            samples: Some(10),
        })
        .unwrap();
    assert_ne!(next_id, id);
}

#[test]
fn planted_preference_picks_the_dominant_feature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let items: Vec<Trajectory> = (0..25)
        .map(|i| Trajectory::new(format!("o{i:02}"), (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let set = TrajectorySet::new(3, items).unwrap();
    let top = (0..set.len())
        .max_by(|&a, &b| set.get(a).features[0].total_cmp(&set.get(b).features[0]))
        .unwrap();
    let top_id = set.get(top).id.clone();
    let mut registry = SetRegistry::new();
    registry.insert("planted", set.clone());
    let store = SessionStore::in_memory(registry, ServiceConfig::default());
    let id = store
        .create_session(CreateSession {
            set_id: "planted".into(),
            policy: QueryPolicy::new(PolicyKind::InfoGain),
            sigma: 0.05,
            epsilon: 0.1,
            seed: Some(8),
            samples: Some(100),
        })
        .unwrap();
    let user = SimulatedUser::new(WeightVector::unit(vec![1.0, 0.0, 0.0]).unwrap(), 0.5, 0.0, 0.1).unwrap();
    for _ in 0..15 {
        let view = store.next_query(&id).unwrap();
        let psi = noiseless_response(&user, &Query::new(view.query.p, view.query.q), &set).unwrap();
        store.submit_feedback(&id, round_to_grid(psi, 0.1).unwrap()).unwrap();
    }
    assert_eq!(store.get_estimate(&id).unwrap().best_trajectory.id, top_id);
}
