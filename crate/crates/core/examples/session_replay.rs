//! A persisted session rebuilt from its event log alone.

use scalefb::queries::{PolicyKind, QueryPolicy};
use scalefb::service::{read_events, replay_events, CreateSession, ServiceConfig, SessionStore, SetRegistry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("scalefb-replay-{}", std::process::id()));
    let store = SessionStore::open(&dir, SetRegistry::with_builtin(), ServiceConfig::default())?;
    let id = store.create_session(CreateSession {
        set_id: "fetch".into(),
        policy: QueryPolicy::new(PolicyKind::MaxRegret),
        sigma: 0.35,
        epsilon: 0.1,
        seed: Some(12),
        samples: None,
    })?;
    for mu in [0.6, -0.2, 1.0, 0.0, -0.7] {
        store.next_query(&id)?;
        store.submit_feedback(&id, mu)?;
    }
    let live = store.get_estimate(&id)?;
    let log = store.log_path(&id).expect("persistent store");
    println!("{}:", log.display());
    print!("{}", std::fs::read_to_string(&log)?);

    let events = read_events(&log)?;
    let (state, belief) = replay_events(&events, &SetRegistry::with_builtin())?;
    let replayed = belief.mean_weight()?;
    println!("live w_hat     {:?}", live.w_hat.as_slice());
    println!("replayed w_hat {:?}", replayed.w_hat.as_slice());
    println!("{} records, identical: {}", state.history.len(), replayed.w_hat == live.w_hat);

    drop(store);
    let reopened = SessionStore::open(&dir, SetRegistry::with_builtin(), ServiceConfig::default())?;
    println!("after restart identical: {}", reopened.get_estimate(&id)? == live);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
