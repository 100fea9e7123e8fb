use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::error::ServiceError;
use super::registry::{SetInfo, SetRegistry};
use crate::belief::{Belief, BeliefSnapshot};
use crate::queries::QueryPolicy;
use crate::rng::{rng_for, SessionRng};
use crate::sampler::{sample_posterior_with, SamplerConfig};
use crate::slider::SliderGrid;
use crate::trajectory::{best_trajectory, Query, Trajectory, TrajectorySet, WeightVector};
use crate::user::FeedbackRecord;

const SAMPLER_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;

/// Service-wide settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Posterior samples `M` per session.
    pub samples: usize,
    /// Largest accepted number of samples requested per session.
    pub max_samples: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            samples: 100,
            max_samples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub set_id: String,
    pub policy: QueryPolicy,
    pub sigma: f64,
    pub epsilon: f64,
    /// Session seed; defaults to the policy seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Posterior samples; defaults to the service setting.
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Persisted state of one elicitation session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub set_id: String,
    pub policy: QueryPolicy,
    pub sigma: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub samples: usize,
    pub history: Vec<FeedbackRecord>,
    pub belief_snapshot: BeliefSnapshot,
    pub pending_query: Option<Query>,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub updated: u64,
}

impl SessionState {
    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig::default().with_samples(self.samples)
    }

    /// Randomness for the posterior fitted on the first `n` records.
    pub fn sampler_rng(&self, n: usize) -> SessionRng {
        rng_for(self.seed, &[SAMPLER_STREAM, n as u64])
    }

    /// Randomness for choosing the query that follows `n` records.
    pub fn policy_rng(&self, n: usize) -> SessionRng {
        rng_for(self.seed, &[POLICY_STREAM, n as u64])
    }

    /// Fits the posterior on the first `n` records of the history.
    pub fn fit(&self, n: usize, set: Arc<TrajectorySet>) -> crate::Result<Belief> {
        sample_posterior_with(
            &self.history[..n],
            self.sigma,
            set,
            &self.sampler_config(),
            &mut self.sampler_rng(n),
        )
    }
}

/// One line of a session's append-only event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        session_id: String,
        set_id: String,
        policy: QueryPolicy,
        sigma: f64,
        epsilon: f64,
        seed: u64,
        samples: usize,
        at: u64,
    },
    Query {
        query: Query,
        at: u64,
    },
    Feedback {
        record: FeedbackRecord,
        at: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPair {
    pub p: String,
    pub q: String,
}

impl From<&Query> for QueryPair {
    fn from(q: &Query) -> Self {
        QueryPair {
            p: q.p_id.clone(),
            q: q.q_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub query: QueryPair,
    pub trajectories: Vec<Trajectory>,
    pub epsilon: f64,
    /// Every slider position the answer may take.
    pub grid: Vec<f64>,
    /// Number of answers recorded so far.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackAck {
    pub iteration: usize,
    pub w_hat: WeightVector,
    pub alpha_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateView {
    pub w_hat: WeightVector,
    pub alpha_hat: f64,
    pub best_trajectory: Trajectory,
    pub iteration: usize,
    /// True while no feedback has been given: the estimate is the prior mean.
    pub uninformed: bool,
}

struct Session {
    state: SessionState,
    belief: Belief,
}

/// All sessions, optionally persisted under a directory as
/// `<id>.events.jsonl` plus `<id>.snapshot.json`.
///
/// Mutations of one session hold that session's lock; different sessions
/// proceed independently.
pub struct SessionStore {
    registry: SetRegistry,
    config: ServiceConfig,
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: Mutex<u64>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

impl SessionStore {
    pub fn in_memory(registry: SetRegistry, config: ServiceConfig) -> Self {
        SessionStore {
            registry,
            config,
            dir: None,
            sessions: RwLock::new(HashMap::new()),
            next_id: Mutex::new(1),
        }
    }

    /// Opens a persistent store, restoring every session found in `dir`.
    pub fn open(
        dir: impl AsRef<Path>,
        registry: SetRegistry,
        config: ServiceConfig,
    ) -> Result<Self, ServiceError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(internal)?;
        let mut logs: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(internal)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".events.jsonl"))
            .collect();
        logs.sort();
        let mut sessions = HashMap::new();
        let mut max_id = 0;
        for log in logs {
            let (state, belief) = restore_session(&log, &registry)?;
            if let Some(n) = state
                .session_id
                .strip_prefix("sess-")
                .and_then(|n| n.parse::<u64>().ok())
            {
                max_id = max_id.max(n);
            }
            sessions.insert(
                state.session_id.clone(),
                Arc::new(Mutex::new(Session { state, belief })),
            );
        }
        Ok(SessionStore {
            registry,
            config,
            dir: Some(dir),
            sessions: RwLock::new(sessions),
            next_id: Mutex::new(max_id + 1),
        })
    }

    pub fn sets(&self) -> Vec<SetInfo> {
        self.registry.infos()
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("unknown session {id}")))
    }

    fn set_of(&self, state: &SessionState) -> Result<Arc<TrajectorySet>, ServiceError> {
        self.registry
            .get(&state.set_id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("unknown trajectory set {}", state.set_id)))
    }

    pub fn create_session(&self, req: CreateSession) -> Result<String, ServiceError> {
        let set = self
            .registry
            .get(&req.set_id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("unknown trajectory set {}", req.set_id)))?;
        req.policy.validate()?;
        if !(req.sigma > 0.0 && req.sigma.is_finite()) {
            return Err(ServiceError::Validation(format!(
                "sigma must be positive, got {}",
                req.sigma
            )));
        }
        SliderGrid::new(req.epsilon)?;
        let samples = req.samples.unwrap_or(self.config.samples);
        if samples == 0 || samples > self.config.max_samples {
            return Err(ServiceError::Validation(format!(
                "samples must lie in 1..={}, got {samples}",
                self.config.max_samples
            )));
        }
        let id = {
            let mut next = self.next_id.lock().expect("lock");
            let id = format!("sess-{:06}", *next);
            *next += 1;
            id
        };
        let at = now();
        let mut state = SessionState {
            session_id: id.clone(),
            set_id: req.set_id,
            seed: req.seed.unwrap_or(req.policy.seed),
            policy: req.policy,
            sigma: req.sigma,
            epsilon: req.epsilon,
            samples,
            history: Vec::new(),
            belief_snapshot: BeliefSnapshot {
                samples: Vec::new(),
                weights: Vec::new(),
                sigma: req.sigma,
            },
            pending_query: None,
            created: at,
            updated: at,
        };
        let belief = state.fit(0, set)?;
        state.belief_snapshot = belief.snapshot();
        self.append(
            &id,
            &SessionEvent::Created {
                session_id: id.clone(),
                set_id: state.set_id.clone(),
                policy: state.policy.clone(),
                sigma: state.sigma,
                epsilon: state.epsilon,
                seed: state.seed,
                samples: state.samples,
                at,
            },
        )?;
        self.write_snapshot(&state)?;
        self.sessions
            .write()
            .expect("lock")
            .insert(id.clone(), Arc::new(Mutex::new(Session { state, belief })));
        Ok(id)
    }

    /// The pending query, choosing and persisting a new one if none is pending.
    pub fn next_query(&self, id: &str) -> Result<QueryView, ServiceError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().expect("lock");
        let set = self.set_of(&session.state)?;
        let query = match &session.state.pending_query {
            Some(q) => q.clone(),
            None => {
                let n = session.state.history.len();
                let mut rng = session.state.policy_rng(n);
                let q = session
                    .state
                    .policy
                    .select(&session.belief, session.state.epsilon, &mut rng)?;
                let at = now();
                self.append(id, &SessionEvent::Query { query: q.clone(), at })?;
                session.state.pending_query = Some(q.clone());
                session.state.updated = at;
                self.write_snapshot(&session.state)?;
                q
            }
        };
        let (p, q) = set.resolve(&query).map_err(internal)?;
        Ok(QueryView {
            query: QueryPair::from(&query),
            trajectories: vec![set.get(p).clone(), set.get(q).clone()],
            epsilon: session.state.epsilon,
            grid: SliderGrid::new(session.state.epsilon)?.points().to_vec(),
            iteration: session.state.history.len(),
        })
    }

    /// Records the answer to the pending query and refits the posterior on
    /// the full history.
    pub fn submit_feedback(&self, id: &str, mu: f64) -> Result<FeedbackAck, ServiceError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().expect("lock");
        let set = self.set_of(&session.state)?;
        let grid = SliderGrid::new(session.state.epsilon)?;
        let Some(idx) = grid.index_of(mu) else {
            return Err(ServiceError::Validation(format!(
                "mu = {mu} is not on the slider grid of step {} ({} positions from -1 to 1)",
                session.state.epsilon,
                grid.len()
            )));
        };
        let Some(query) = session.state.pending_query.clone() else {
            return Err(ServiceError::Conflict(format!(
                "session {id} has no pending query"
            )));
        };
        // store the exact grid value so replays see identical records
        let record = FeedbackRecord::new(query, grid.points()[idx], session.state.epsilon);
        let mut next = session.state.clone();
        next.history.push(record.clone());
        next.pending_query = None;
        let n = next.history.len();
        let belief = next.fit(n, set)?;
        let estimate = belief.mean_weight()?;
        let at = now();
        self.append(id, &SessionEvent::Feedback { record, at })?;
        next.belief_snapshot = belief.snapshot();
        next.updated = at;
        self.write_snapshot(&next)?;
        session.state = next;
        session.belief = belief;
        Ok(FeedbackAck {
            iteration: n,
            w_hat: estimate.w_hat,
            alpha_hat: estimate.alpha_hat,
        })
    }

    pub fn get_estimate(&self, id: &str) -> Result<EstimateView, ServiceError> {
        let handle = self.session(id)?;
        let session = handle.lock().expect("lock");
        let set = self.set_of(&session.state)?;
        let estimate = session.belief.mean_weight()?;
        let best = best_trajectory(&estimate.w_hat, &set)?.clone();
        Ok(EstimateView {
            w_hat: estimate.w_hat,
            alpha_hat: estimate.alpha_hat,
            best_trajectory: best,
            iteration: session.state.history.len(),
            uninformed: session.state.history.is_empty(),
        })
    }

    pub fn state(&self, id: &str) -> Result<SessionState, ServiceError> {
        let handle = self.session(id)?;
        let state = handle.lock().expect("lock").state.clone();
        Ok(state)
    }

    pub fn log_path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.events.jsonl")))
    }

    pub fn snapshot_path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.snapshot.json")))
    }

    fn append(&self, id: &str, event: &SessionEvent) -> Result<(), ServiceError> {
        let Some(path) = self.log_path(id) else {
            return Ok(());
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(internal)?;
        let line = serde_json::to_string(event).map_err(internal)?;
        writeln!(file, "{line}").map_err(internal)?;
        file.sync_data().map_err(internal)
    }

    fn write_snapshot(&self, state: &SessionState) -> Result<(), ServiceError> {
        let Some(path) = self.snapshot_path(&state.session_id) else {
            return Ok(());
        };
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(state).map_err(internal)?;
        std::fs::write(&tmp, text).map_err(internal)?;
        std::fs::rename(&tmp, &path).map_err(internal)
    }
}

/// Reads a session's event log.
pub fn read_events(path: impl AsRef<Path>) -> Result<Vec<SessionEvent>, ServiceError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| internal(format!("{}: {e}", path.display())))?;
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(internal)?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line)
            .map_err(|e| internal(format!("{}:{}: {e}", path.display(), n + 1)))?;
        events.push(ev);
    }
    Ok(events)
}

/// Rebuilds a session from its event log alone, refitting the posterior
/// from the recorded history and seed.
pub fn replay_events(
    events: &[SessionEvent],
    registry: &SetRegistry,
) -> Result<(SessionState, Belief), ServiceError> {
    let mut iter = events.iter();
    let Some(SessionEvent::Created {
        session_id,
        set_id,
        policy,
        sigma,
        epsilon,
        seed,
        samples,
        at,
    }) = iter.next()
    else {
        return Err(internal("event log does not start with a created event"));
    };
    let set = registry
        .get(set_id)
        .cloned()
        .ok_or_else(|| ServiceError::NotFound(format!("unknown trajectory set {set_id}")))?;
    let mut state = SessionState {
        session_id: session_id.clone(),
        set_id: set_id.clone(),
        policy: policy.clone(),
        sigma: *sigma,
        epsilon: *epsilon,
        seed: *seed,
        samples: *samples,
        history: Vec::new(),
        belief_snapshot: BeliefSnapshot {
            samples: Vec::new(),
            weights: Vec::new(),
            sigma: *sigma,
        },
        pending_query: None,
        created: *at,
        updated: *at,
    };
    for ev in iter {
        match ev {
            SessionEvent::Created { .. } => return Err(internal("duplicate created event")),
            SessionEvent::Query { query, at } => {
                state.pending_query = Some(query.clone());
                state.updated = *at;
            }
            SessionEvent::Feedback { record, at } => {
                state.history.push(record.clone());
                state.pending_query = None;
                state.updated = *at;
            }
        }
    }
    let belief = state.fit(state.history.len(), set)?;
    state.belief_snapshot = belief.snapshot();
    Ok((state, belief))
}

/// Restores a session, reusing its snapshot when it matches the log.
fn restore_session(log: &Path, registry: &SetRegistry) -> Result<(SessionState, Belief), ServiceError> {
    let events = read_events(log)?;
    let snapshot_path = PathBuf::from(
        log.to_string_lossy()
            .replace(".events.jsonl", ".snapshot.json"),
    );
    if let Ok(text) = std::fs::read_to_string(&snapshot_path) {
        if let Ok(snap) = serde_json::from_str::<SessionState>(&text) {
            let history: Vec<&FeedbackRecord> = events
                .iter()
                .filter_map(|e| match e {
                    SessionEvent::Feedback { record, .. } => Some(record),
                    _ => None,
                })
                .collect();
            let pending = events.iter().rev().find_map(|e| match e {
                SessionEvent::Query { query, .. } => Some(Some(query)),
                SessionEvent::Feedback { .. } => Some(None),
                SessionEvent::Created { .. } => None,
            });
            let consistent = snap.history.iter().eq(history.iter().copied())
                && snap.pending_query.as_ref() == pending.flatten();
            if consistent {
                if let Some(set) = registry.get(&snap.set_id) {
                    let belief =
                        Belief::from_snapshot(&snap.belief_snapshot, snap.history.clone(), Arc::clone(set))?;
                    return Ok((snap, belief));
                }
            }
        }
    }
    replay_events(&events, registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queries::PolicyKind;

    fn request(kind: PolicyKind) -> CreateSession {
        CreateSession {
            set_id: "fetch".into(),
            policy: QueryPolicy::new(kind).with_budget(200),
            sigma: 0.35,
            epsilon: 0.1,
            seed: Some(4),
            samples: Some(30),
        }
    }

    fn store() -> SessionStore {
        SessionStore::in_memory(SetRegistry::with_builtin(), ServiceConfig::default())
    }

    #[test]
    fn create_and_unknown_set() {
        let s = store();
        let a = s.create_session(request(PolicyKind::Random)).unwrap();
        let b = s.create_session(request(PolicyKind::Random)).unwrap();
        assert_ne!(a, b);
        assert!(s.state(&a).unwrap().history.is_empty());
        let mut bad = request(PolicyKind::Random);
        bad.set_id = "nope".into();
        match s.create_session(bad).unwrap_err() {
            ServiceError::NotFound(m) => assert!(m.contains("nope")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn pending_query_is_idempotent() {
        let s = store();
        let id = s.create_session(request(PolicyKind::InfoGain)).unwrap();
        let a = s.next_query(&id).unwrap();
        let b = s.next_query(&id).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid.len(), 21);
        assert_eq!(a.trajectories[0].id, a.query.p);
    }

    #[test]
    fn feedback_validation() {
        let s = store();
        let id = s.create_session(request(PolicyKind::Random)).unwrap();
        assert!(matches!(s.submit_feedback(&id, 0.4), Err(ServiceError::Conflict(_))));
        s.next_query(&id).unwrap();
        match s.submit_feedback(&id, 0.35).unwrap_err() {
            ServiceError::Validation(m) => assert!(m.contains("0.1")),
            e => panic!("unexpected {e:?}"),
        }
        let ack = s.submit_feedback(&id, 0.4).unwrap();
        assert_eq!(ack.iteration, 1);
        assert_eq!(s.state(&id).unwrap().history.len(), 1);
        assert!(s.state(&id).unwrap().pending_query.is_none());
        assert!(matches!(s.submit_feedback(&id, 0.4), Err(ServiceError::Conflict(_))));
        assert!(matches!(s.next_query("missing"), Err(ServiceError::NotFound(_))));
    }

    #[test]
    fn fresh_estimate_is_uninformed_and_stable() {
        let s = store();
        let id = s.create_session(request(PolicyKind::Random)).unwrap();
        let a = s.get_estimate(&id).unwrap();
        assert!(a.uninformed);
        assert_eq!(a, s.get_estimate(&id).unwrap());
    }
}
