//! Interactive sessions: a client plays the sequential scheduler.
//!
//! [`Session`] holds the logic; [`http`] exposes it over HTTP + JSON.

pub mod http;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::json;

use crate::algorithm::{apply_move, decide, resulting_body, ConditionId};
use crate::configuration::{Boundaries, Configuration, Pid};
use crate::engine::{self, activable, Scheduler, StepEvent, StepOutcome, StopReason, Strategy, Trace};
use crate::grid::NodeCoord;
use crate::verify::{self, CheckReport, ProgressVector};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionError {
    /// HTTP status the error maps to.
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub detail: serde_json::Value,
}

impl SessionError {
    fn new(status: u16, code: &'static str, message: impl Into<String>, detail: serde_json::Value) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            detail,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(400, "bad_request", message, serde_json::Value::Null)
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(404, "unknown_session", format!("no session `{id}`"), json!({ "id": id }))
    }
}

impl std::fmt::Display for SessionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for SessionError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyEntry {
    pub node: NodeCoord,
    pub pid: Pid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParticleState {
    pub pid: Pid,
    pub nodes: Vec<NodeCoord>,
    /// `contracted` or `expanded`.
    pub shape: &'static str,
    /// `horizontal` or `diagonal` for expanded particles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActivableState {
    pub pid: Pid,
    pub condition: ConditionId,
    pub resulting_nodes: Vec<NodeCoord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionState {
    pub id: String,
    pub occupancy: Vec<OccupancyEntry>,
    pub particles: Vec<ParticleState>,
    pub activable: Vec<ActivableState>,
    /// Against the session's frozen boundaries.
    pub progress: ProgressVector,
    pub boundaries: Boundaries,
    /// False once some node lies beyond the frozen boundaries.
    pub boundary_ok: bool,
    pub leaders: Vec<Pid>,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub step_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActivateResponse {
    pub state: SessionState,
    pub event: StepEvent,
    pub check: CheckReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutoResponse {
    pub state: SessionState,
    pub events: Vec<StepEvent>,
    pub stop: StopReason,
}

/// One scheduler session.
#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    initial: Configuration,
    boundaries: Boundaries,
    current: Configuration,
    history: Vec<StepEvent>,
}

impl Session {
    pub fn create(id: impl Into<String>, config_text: &str) -> Result<Session, SessionError> {
        let config = Configuration::parse(config_text)
            .map_err(|e| SessionError::new(400, "invalid_config", e.to_string(), json!({ "error": format!("{e:?}") })))?;
        Session::from_config(id, config)
    }

    pub fn from_config(id: impl Into<String>, config: Configuration) -> Result<Session, SessionError> {
        if !config.is_connected() {
            return Err(SessionError::new(
                400,
                "disconnected",
                "configuration is not connected",
                serde_json::Value::Null,
            ));
        }
        let boundaries = config
            .boundaries()
            .map_err(|e| SessionError::new(400, "invalid_config", e.to_string(), serde_json::Value::Null))?;
        Ok(Session {
            id: id.into(),
            initial: config.clone(),
            boundaries,
            current: config,
            history: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn current(&self) -> &Configuration {
        &self.current
    }

    pub fn history(&self) -> &[StepEvent] {
        &self.history
    }

    pub fn state(&self) -> SessionState {
        let config = &self.current;
        let active = activable(config);
        SessionState {
            id: self.id.clone(),
            occupancy: config
                .occupancy()
                .into_iter()
                .map(|(node, pid)| OccupancyEntry { node, pid })
                .collect(),
            particles: config
                .particles()
                .map(|p| ParticleState {
                    pid: p.pid,
                    nodes: p.body.sorted_nodes(),
                    shape: if p.body.is_expanded() { "expanded" } else { "contracted" },
                    axis: p.body.axis().map(|a| if a.is_diagonal() { "diagonal" } else { "horizontal" }),
                })
                .collect(),
            activable: active
                .iter()
                .map(|a| ActivableState {
                    pid: a.pid,
                    condition: a.decision.condition,
                    resulting_nodes: resulting_body(config, a.pid, &a.decision)
                        .expect("pid exists")
                        .sorted_nodes(),
                })
                .collect(),
            progress: verify::progress_vector_unchecked(config, self.boundaries),
            boundaries: self.boundaries,
            boundary_ok: verify::boundary_breach(config, self.boundaries).is_none(),
            leaders: verify::leaders(config).into_iter().collect(),
            is_final: active.is_empty(),
            step_count: self.history.len(),
        }
    }

    fn not_activable(&self, pid: Pid) -> SessionError {
        let active: Vec<Pid> = activable(&self.current).into_iter().map(|a| a.pid).collect();
        SessionError::new(
            409,
            "not_activable",
            format!("particle {pid} is not activable"),
            json!({ "pid": pid, "activable": active }),
        )
    }

    /// Fires `pid`. On error the session is unchanged.
    pub fn activate(&mut self, pid: Pid) -> Result<ActivateResponse, SessionError> {
        if self.current.body(pid).is_none() {
            return Err(self.not_activable(pid));
        }
        let decision = decide(&self.current, pid)
            .expect("pid exists")
            .ok_or_else(|| self.not_activable(pid))?;
        let next = apply_move(&self.current, pid, &decision).expect("fresh decision");
        let event = StepEvent {
            step: self.history.len() as u64,
            pid,
            condition: decision.condition,
            before: self.current.body(pid).unwrap().sorted_nodes(),
            after: next.body(pid).unwrap().sorted_nodes(),
            progress: Some(verify::progress_vector_unchecked(&next, self.boundaries)),
        };
        let check = verify::check_transition(&self.current, &next, &event, self.boundaries);
        self.current = next;
        self.history.push(event.clone());
        Ok(ActivateResponse {
            state: self.state(),
            event,
            check,
        })
    }

    /// Advances up to `steps` scheduler steps with a fresh scheduler.
    pub fn auto_run(&mut self, strategy: &str, steps: u64, seed: u64) -> Result<AutoResponse, SessionError> {
        let strategy = Strategy::from_name(strategy, seed)
            .map_err(|e| SessionError::new(400, "invalid_strategy", e.to_string(), json!({ "strategy": strategy })))?;
        let mut scheduler = Scheduler::new(strategy);
        let mut events = Vec::new();
        let mut stop = StopReason::StepLimit;
        for _ in 0..steps {
            let index = self.history.len() as u64;
            match engine::step(&self.current, &mut scheduler, self.boundaries, index) {
                Ok(StepOutcome::Moved(next, event)) => {
                    self.current = next;
                    self.history.push(event.clone());
                    events.push(event);
                }
                Ok(StepOutcome::Terminal) => {
                    stop = StopReason::Terminal;
                    break;
                }
                Ok(StepOutcome::ScriptExhausted) => {
                    stop = StopReason::ScriptExhausted;
                    break;
                }
                Err(e) => {
                    return Err(SessionError::new(409, "not_activable", e.to_string(), serde_json::Value::Null));
                }
            }
        }
        if stop == StopReason::StepLimit && verify::is_final(&self.current) {
            stop = StopReason::Terminal;
        }
        Ok(AutoResponse {
            state: self.state(),
            events,
            stop,
        })
    }

    /// Drops the last event and rebuilds the configuration by replay.
    pub fn undo(&mut self) -> Result<SessionState, SessionError> {
        if self.history.pop().is_none() {
            return Err(SessionError::new(
                409,
                "empty_history",
                "nothing to undo",
                serde_json::Value::Null,
            ));
        }
        let mut config = self.initial.clone();
        for e in &self.history {
            let d = decide(&config, e.pid)
                .expect("pid exists")
                .expect("recorded event replays");
            config = apply_move(&config, e.pid, &d).expect("recorded event replays");
        }
        self.current = config;
        Ok(self.state())
    }

    /// The session so far as a trace.
    pub fn trace(&self) -> Trace {
        Trace {
            initial: self.initial.clone(),
            boundaries: self.boundaries,
            strategy: Strategy::Scripted {
                pids: self.history.iter().map(|e| e.pid).collect(),
            },
            events: self.history.clone(),
            stop: if verify::is_final(&self.current) {
                StopReason::Terminal
            } else {
                StopReason::ScriptExhausted
            },
        }
    }

    pub fn snapshot(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.trace().to_jsonl())
    }
}

/// In-memory sessions. Each session has its own lock, so requests to one
/// session are serialized while different sessions proceed independently.
#[derive(Clone, Default)]
pub struct SessionStore {
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh_id() -> String {
        format!("{:032x}", rand::random::<u128>())
    }

    pub fn create(&self, config_text: &str) -> Result<SessionState, SessionError> {
        let session = Session::create(Self::fresh_id(), config_text)?;
        let state = session.state();
        self.sessions
            .lock()
            .unwrap()
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(state)
    }

    /// Runs `f` with the session locked.
    pub fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, SessionError>) -> Result<T, SessionError> {
        let handle = self
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::unknown_session(id))?;
        let mut session = handle.lock().unwrap();
        f(&mut session)
    }

    pub fn remove(&self, id: &str) -> Result<(), SessionError> {
        self.sessions
            .lock()
            .unwrap()
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| SessionError::unknown_session(id))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STACKED: &str = r#"{"particles":[{"nodes":[[0,0]]},{"nodes":[[0,1]]}]}"#;

    fn c(q: i64, r: i64) -> NodeCoord {
        NodeCoord::new(q, r)
    }

    #[test]
    fn create_examples() {
        let single = Session::create("s", r#"{"particles":[{"nodes":[[2,2]]}]}"#).unwrap();
        let st = single.state();
        assert!(st.is_final);
        assert_eq!(st.leaders, vec![Pid(0)]);

        let st = Session::create("s", STACKED).unwrap().state();
        assert!(!st.is_final);
        assert_eq!(st.activable.len(), 1);
        assert_eq!((st.activable[0].pid, st.activable[0].condition), (Pid(0), ConditionId::C1));
        assert_eq!(st.activable[0].resulting_nodes, vec![c(0, 0), c(-1, 1)]);

        let err = Session::create("s", r#"{"particles":[{"nodes":[[0,0]]},{"nodes":[[4,4]]}]}"#).unwrap_err();
        assert_eq!((err.status, err.code), (400, "disconnected"));
        let err = Session::create("s", "{").unwrap_err();
        assert_eq!(err.code, "invalid_config");
    }

    #[test]
    fn activate_until_final() {
        let mut s = Session::create("s", STACKED).unwrap();
        let before = s.state().progress;
        let r = s.activate(Pid(0)).unwrap();
        assert_eq!(r.event.after, vec![c(0, 0), c(-1, 1)]);
        assert!(r.state.progress.p1 < before.p1);
        assert!(r.check.passed);
        let r = s.activate(Pid(0)).unwrap();
        assert!(r.state.is_final);
        assert_eq!(r.state.leaders.len(), 1);
        assert!(r.state.progress < before);
    }

    #[test]
    fn invalid_activation_leaves_state() {
        let mut s = Session::create("s", STACKED).unwrap();
        let before = s.state();
        for pid in [Pid(1), Pid(9)] {
            let err = s.activate(pid).unwrap_err();
            assert_eq!(err.code, "not_activable");
            assert_eq!(err.detail["activable"], json!([0]));
            assert_eq!(s.state(), before);
        }
    }

    #[test]
    fn undo_replays() {
        let mut s = Session::create("s", STACKED).unwrap();
        assert_eq!(s.undo().unwrap_err().code, "empty_history");
        let fresh = s.state();
        s.activate(Pid(0)).unwrap();
        let after_one = s.state();
        s.activate(Pid(0)).unwrap();
        assert_eq!(s.undo().unwrap(), after_one);
        assert_eq!(s.undo().unwrap(), fresh);
    }

    #[test]
    fn auto_run_is_deterministic() {
        let cfg = crate::generate::generate_random(15, 0.3, 0.3, 4).unwrap();
        let base = Session::from_config("s", cfg).unwrap();
        let mut a = base.clone();
        let mut b = base.clone();
        let ra = a.auto_run("random", 50, 9).unwrap();
        let rb = b.auto_run("random", 50, 9).unwrap();
        assert_eq!(ra, rb);
        let mut z = base.clone();
        let r0 = z.auto_run("greedy", 0, 0).unwrap();
        assert!(r0.events.is_empty());
        assert_eq!(r0.state, base.state());
        assert_eq!(z.auto_run("sideways", 1, 0).unwrap_err().code, "invalid_strategy");
    }

    #[test]
    fn history_replays_to_current() {
        let cfg = crate::generate::generate_random(12, 0.4, 0.2, 21).unwrap();
        let mut s = Session::from_config("s", cfg).unwrap();
        s.auto_run("round-robin", 40, 0).unwrap();
        let trace = s.trace();
        let configs = trace.replay().unwrap();
        assert_eq!(configs.last().unwrap(), s.current());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        s.snapshot(&path).unwrap();
        let back: Trace = std::fs::read_to_string(&path).unwrap().parse().unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn store_lifecycle() {
        let store = SessionStore::new();
        let st = store.create(STACKED).unwrap();
        assert_eq!(store.len(), 1);
        let again = store.with(&st.id, |s| Ok(s.state())).unwrap();
        assert_eq!(again, st);
        store.remove(&st.id).unwrap();
        assert_eq!(store.remove(&st.id).unwrap_err().code, "unknown_session");
        assert!(store.is_empty());
    }
}
