//! Sequential unfair scheduler and replayable execution traces.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{apply_move, decide, resulting_body, ConditionId, Decision};
use crate::configuration::{Boundaries, ConfigError, Configuration, Pid};
use crate::grid::NodeCoord;
use crate::verify::{self, CheckReport, ProgressVector};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// A particle that would move if activated, with its decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Activable {
    pub pid: Pid,
    pub decision: Decision,
}

/// Every activable particle, in pid order.
pub fn activable(config: &Configuration) -> Vec<Activable> {
    config
        .pids()
        .filter_map(|pid| {
            decide(config, pid)
                .expect("pid from the configuration")
                .map(|decision| Activable { pid, decision })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Random { seed: u64 },
    RoundRobin,
    GreedyAdversarial,
    Scripted { pids: Vec<Pid> },
}

impl Strategy {
    /// Parses a strategy name as used on the command line and in the service.
    pub fn from_name(name: &str, seed: u64) -> Result<Strategy, EngineError> {
        match name {
            "random" => Ok(Strategy::Random { seed }),
            "round-robin" | "round_robin" | "roundrobin" => Ok(Strategy::RoundRobin),
            "greedy" | "greedy-adversarial" | "greedy_adversarial" => Ok(Strategy::GreedyAdversarial),
            other => match other.strip_prefix("scripted:") {
                Some(list) => {
                    let pids = list
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.trim().parse::<u32>().map(Pid))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| EngineError::UnknownStrategy(other.to_string()))?;
                    Ok(Strategy::Scripted { pids })
                }
                None => Err(EngineError::UnknownStrategy(other.to_string())),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random { .. } => "random",
            Strategy::RoundRobin => "round-robin",
            Strategy::GreedyAdversarial => "greedy",
            Strategy::Scripted { .. } => "scripted",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random { seed } => write!(f, "random(seed={seed})"),
            Strategy::Scripted { pids } => write!(f, "scripted({} picks)", pids.len()),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial configuration is not connected")]
    Disconnected,
    #[error("step {step}: scripted particle {pid} is not activable (activable: {activable:?})")]
    NotActivable {
        step: u64,
        pid: Pid,
        activable: Vec<Pid>,
    },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

/// Strategy plus its mutable state.
#[derive(Clone, Debug)]
pub struct Scheduler {
    strategy: Strategy,
    rng: ChaCha8Rng,
    last: Option<Pid>,
    cursor: usize,
}

/// What the scheduler picked.
enum Pick {
    Index(usize),
    ScriptDone,
}

impl Scheduler {
    pub fn new(strategy: Strategy) -> Self {
        let seed = match strategy {
            Strategy::Random { seed } => seed,
            _ => 0,
        };
        Self {
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: None,
            cursor: 0,
        }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    fn pick(&mut self, config: &Configuration, candidates: &[Activable], step: u64) -> Result<Pick, EngineError> {
        debug_assert!(!candidates.is_empty());
        let index = match &self.strategy {
            Strategy::Random { .. } => self.rng.random_range(0..candidates.len()),
            Strategy::RoundRobin => candidates
                .iter()
                .position(|a| self.last.is_none_or(|last| a.pid > last))
                .unwrap_or(0),
            Strategy::GreedyAdversarial => greedy_choice(config, candidates),
            Strategy::Scripted { pids } => {
                let Some(&pid) = pids.get(self.cursor) else {
                    return Ok(Pick::ScriptDone);
                };
                self.cursor += 1;
                candidates
                    .iter()
                    .position(|a| a.pid == pid)
                    .ok_or_else(|| EngineError::NotActivable {
                        step,
                        pid,
                        activable: candidates.iter().map(|a| a.pid).collect(),
                    })?
            }
        };
        self.last = Some(candidates[index].pid);
        Ok(Pick::Index(index))
    }
}

/// One-step lookahead: the activation leaving the most activable particles,
/// ties broken by smallest pid.
pub fn greedy_choice(config: &Configuration, candidates: &[Activable]) -> usize {
    let mut best = (0, usize::MIN);
    for (i, a) in candidates.iter().enumerate() {
        let next = apply_move(config, a.pid, &a.decision).expect("fresh decision");
        let score = activable(&next).len();
        if i == 0 || score > best.1 {
            best = (i, score);
        }
    }
    best.0
}

/// One scheduler step as recorded in a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: u64,
    pub pid: Pid,
    pub condition: ConditionId,
    pub before: Vec<NodeCoord>,
    pub after: Vec<NodeCoord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub progress: Option<ProgressVector>,
}

pub enum StepOutcome {
    Terminal,
    ScriptExhausted,
    Moved(Configuration, StepEvent),
}

/// Runs one step of the scheduler on `config`.
pub fn step(
    config: &Configuration,
    scheduler: &mut Scheduler,
    boundaries: Boundaries,
    step_index: u64,
) -> Result<StepOutcome, EngineError> {
    let candidates = activable(config);
    if candidates.is_empty() {
        return Ok(StepOutcome::Terminal);
    }
    let index = match scheduler.pick(config, &candidates, step_index)? {
        Pick::Index(i) => i,
        Pick::ScriptDone => return Ok(StepOutcome::ScriptExhausted),
    };
    let chosen = &candidates[index];
    let next = apply_move(config, chosen.pid, &chosen.decision).expect("decision is fresh under the sequential scheduler");
    let event = StepEvent {
        step: step_index,
        pid: chosen.pid,
        condition: chosen.decision.condition,
        before: config.body(chosen.pid).unwrap().sorted_nodes(),
        after: next.body(chosen.pid).unwrap().sorted_nodes(),
        progress: Some(verify::progress_vector_unchecked(&next, boundaries)),
    };
    Ok(StepOutcome::Moved(next, event))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub max_steps: u64,
    pub verify: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            verify: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Terminal,
    StepLimit,
    ScriptExhausted,
}

/// A replayable execution record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Configuration,
    pub boundaries: Boundaries,
    pub strategy: Strategy,
    pub events: Vec<StepEvent>,
    pub stop: StopReason,
}

/// Outcome of [`run`].
#[derive(Clone, Debug)]
pub struct RunResult {
    pub trace: Trace,
    pub final_config: Configuration,
    /// Failed per-step checks, by step index. Empty unless verification is on.
    pub step_failures: Vec<(u64, CheckReport)>,
    /// Final-property check of a terminal configuration when verifying.
    pub final_report: Option<CheckReport>,
}

impl RunResult {
    pub fn terminal(&self) -> bool {
        self.trace.stop == StopReason::Terminal
    }

    /// True when every enabled check passed.
    pub fn clean(&self) -> bool {
        self.step_failures.is_empty() && self.final_report.as_ref().is_none_or(|r| r.passed)
    }
}

/// Runs the scheduler until no particle is activable or `max_steps` is reached.
pub fn run(config: &Configuration, strategy: Strategy, options: RunOptions) -> Result<RunResult, EngineError> {
    if !config.is_connected() {
        return Err(EngineError::Disconnected);
    }
    let boundaries = config.boundaries()?;
    let mut scheduler = Scheduler::new(strategy.clone());
    let mut current = config.clone();
    let mut events = Vec::new();
    let mut step_failures = Vec::new();
    let mut stop = StopReason::StepLimit;
    for index in 0..options.max_steps {
        match step(&current, &mut scheduler, boundaries, index)? {
            StepOutcome::Terminal => {
                stop = StopReason::Terminal;
                break;
            }
            StepOutcome::ScriptExhausted => {
                stop = StopReason::ScriptExhausted;
                break;
            }
            StepOutcome::Moved(next, event) => {
                if options.verify {
                    let report = verify::check_transition(&current, &next, &event, boundaries);
                    if !report.passed {
                        step_failures.push((index, report));
                    }
                }
                events.push(event);
                current = next;
            }
        }
    }
    if stop == StopReason::StepLimit && verify::is_final(&current) {
        stop = StopReason::Terminal;
    }
    let final_report = (options.verify && stop == StopReason::Terminal)
        .then(|| verify::check_final_properties(&current).expect("terminal configuration is final"));
    Ok(RunResult {
        trace: Trace {
            initial: config.clone(),
            boundaries,
            strategy,
            events,
            stop,
        },
        final_config: current,
        step_failures,
        final_report,
    })
}

#[derive(Serialize, Deserialize)]
struct TraceHeader {
    initial: serde_json::Value,
    boundaries: Boundaries,
    strategy: Strategy,
    stop: StopReason,
    steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("trace line {line}: {source}")]
    Config {
        line: usize,
        #[source]
        source: ConfigError,
    },
    #[error("step {step}: {message}")]
    Mismatch { step: u64, message: String },
}

impl Trace {
    /// Line-delimited JSON: a header line, then one line per event.
    pub fn to_jsonl(&self) -> String {
        let header = TraceHeader {
            initial: serde_json::from_str(&self.initial.to_json_by_pid()).expect("valid json"),
            boundaries: self.boundaries,
            strategy: self.strategy.clone(),
            stop: self.stop,
            steps: self.events.len(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<Trace, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError::Format {
            line: 1,
            message: "empty trace".into(),
        })?;
        let header: TraceHeader = serde_json::from_str(first).map_err(|e| TraceError::Format {
            line: 1,
            message: e.to_string(),
        })?;
        let initial = Configuration::parse(&header.initial.to_string())
            .map_err(|source| TraceError::Config { line: 1, source })?;
        let mut events = Vec::new();
        for (i, line) in lines {
            let event: StepEvent = serde_json::from_str(line).map_err(|e| TraceError::Format {
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(event);
        }
        if events.len() != header.steps {
            return Err(TraceError::Format {
                line: 1,
                message: format!("header announces {} steps, found {}", header.steps, events.len()),
            });
        }
        Ok(Trace {
            initial,
            boundaries: header.boundaries,
            strategy: header.strategy,
            events,
            stop: header.stop,
        })
    }

    pub fn terminal(&self) -> bool {
        self.stop == StopReason::Terminal
    }

    /// Replays every event from the initial configuration, checking that
    /// each recorded move is exactly what the rules produce. Returns all
    /// intermediate configurations, initial first.
    pub fn replay(&self) -> Result<Vec<Configuration>, TraceError> {
        let expected = self.initial.boundaries().map_err(|source| TraceError::Config { line: 1, source })?;
        if expected != self.boundaries {
            return Err(TraceError::Mismatch {
                step: 0,
                message: format!("recorded boundaries {:?} differ from {:?}", self.boundaries, expected),
            });
        }
        let mut configs = vec![self.initial.clone()];
        for (i, e) in self.events.iter().enumerate() {
            let current = configs.last().unwrap();
            let mismatch = |message: String| TraceError::Mismatch { step: e.step, message };
            if e.step != i as u64 {
                return Err(mismatch(format!("expected step index {i}")));
            }
            let body = current
                .body(e.pid)
                .ok_or_else(|| mismatch(format!("unknown particle {}", e.pid)))?;
            if body.sorted_nodes() != e.before {
                return Err(mismatch(format!("particle {} is not at {:?}", e.pid, e.before)));
            }
            let decision = decide(current, e.pid)
                .expect("pid exists")
                .ok_or_else(|| mismatch(format!("particle {} is not activable", e.pid)))?;
            if decision.condition != e.condition {
                return Err(mismatch(format!("rules fire {}, trace says {}", decision.condition, e.condition)));
            }
            let target = resulting_body(current, e.pid, &decision).expect("pid exists");
            if target.sorted_nodes() != e.after {
                return Err(mismatch(format!("rules move to {:?}, trace says {:?}", target.sorted_nodes(), e.after)));
            }
            let next = apply_move(current, e.pid, &decision).expect("fresh decision");
            if let Some(pv) = e.progress {
                let actual = verify::progress_vector_unchecked(&next, self.boundaries);
                if actual != pv {
                    return Err(mismatch(format!("recorded progress {pv}, recomputed {actual}")));
                }
            }
            configs.push(next);
        }
        let last = configs.last().unwrap();
        if self.terminal() != verify::is_final(last) {
            return Err(TraceError::Mismatch {
                step: self.events.len() as u64,
                message: format!("trace claims stop={:?} but final={}", self.stop, verify::is_final(last)),
            });
        }
        Ok(configs)
    }
}

impl FromStr for Trace {
    type Err = TraceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Trace::parse_jsonl(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::Body;
    use std::collections::BTreeSet;

    fn c(q: i64, r: i64) -> NodeCoord {
        NodeCoord::new(q, r)
    }

    fn stacked() -> Configuration {
        Configuration::from_bodies([Body::Contracted(c(0, 0)), Body::Contracted(c(0, 1))]).unwrap()
    }

    fn all_strategies() -> Vec<Strategy> {
        vec![
            Strategy::Random { seed: 1 },
            Strategy::RoundRobin,
            Strategy::GreedyAdversarial,
        ]
    }

    #[test]
    fn activable_examples() {
        let single = Configuration::from_bodies([Body::Contracted(c(0, 0))]).unwrap();
        assert!(activable(&single).is_empty());
        let act = activable(&stacked());
        assert_eq!(act.len(), 1);
        assert_eq!(act[0].pid, Pid(0));
        assert_eq!(act[0].decision.condition, ConditionId::C1);
    }

    #[test]
    fn single_particle_run_is_empty() {
        let single = Configuration::from_bodies([Body::Contracted(c(3, 3))]).unwrap();
        let res = run(&single, Strategy::RoundRobin, RunOptions::default()).unwrap();
        assert!(res.terminal());
        assert!(res.trace.events.is_empty());
    }

    #[test]
    fn stacked_pair_terminates_in_two_steps() {
        for strategy in all_strategies() {
            let res = run(&stacked(), strategy.clone(), RunOptions { verify: true, ..Default::default() }).unwrap();
            assert!(res.terminal(), "{strategy}");
            let conds: Vec<_> = res.trace.events.iter().map(|e| e.condition).collect();
            assert_eq!(conds, [ConditionId::C1, ConditionId::E1]);
            assert_eq!(res.trace.events[0].after, vec![c(0, 0), c(-1, 1)]);
            assert_eq!(res.final_config.body(Pid(0)), Some(Body::Contracted(c(-1, 1))));
            assert_eq!(verify::leaders(&res.final_config), BTreeSet::from([Pid(1)]));
            assert!(res.clean());
        }
    }

    #[test]
    fn greedy_matches_brute_force_lookahead() {
        for seed in 0..40 {
            let cfg = crate::generate::generate_random(10, 0.4, 0.2, seed).unwrap();
            let cands = activable(&cfg);
            if cands.is_empty() {
                continue;
            }
            let scores: Vec<usize> = cands
                .iter()
                .map(|a| activable(&apply_move(&cfg, a.pid, &a.decision).unwrap()).len())
                .collect();
            let max = *scores.iter().max().unwrap();
            let expected = cands[scores.iter().position(|&s| s == max).unwrap()].pid;
            assert_eq!(cands[greedy_choice(&cfg, &cands)].pid, expected);
        }
    }

    #[test]
    fn round_robin_cycles_in_pid_order() {
        let mut sched = Scheduler::new(Strategy::RoundRobin);
        let cfg = crate::generate::generate_random(12, 0.3, 0.0, 5).unwrap();
        let cands = activable(&cfg);
        assert!(cands.len() >= 2);
        let Pick::Index(first) = sched.pick(&cfg, &cands, 0).unwrap() else { panic!() };
        assert_eq!(first, 0);
        let Pick::Index(second) = sched.pick(&cfg, &cands, 1).unwrap() else { panic!() };
        assert_eq!(second, 1);
        sched.last = Some(cands.last().unwrap().pid);
        let Pick::Index(wrapped) = sched.pick(&cfg, &cands, 2).unwrap() else { panic!() };
        assert_eq!(wrapped, 0);
    }

    #[test]
    fn scripted_rejects_non_activable() {
        let err = run(&stacked(), Strategy::Scripted { pids: vec![Pid(1)] }, RunOptions::default()).unwrap_err();
        assert_eq!(
            err,
            EngineError::NotActivable {
                step: 0,
                pid: Pid(1),
                activable: vec![Pid(0)]
            }
        );
        let res = run(&stacked(), Strategy::Scripted { pids: vec![Pid(0)] }, RunOptions::default()).unwrap();
        assert_eq!(res.trace.stop, StopReason::ScriptExhausted);
        assert_eq!(res.trace.events.len(), 1);
    }

    #[test]
    fn step_limit_is_distinct() {
        let res = run(&stacked(), Strategy::RoundRobin, RunOptions { max_steps: 1, verify: true }).unwrap();
        assert_eq!(res.trace.stop, StopReason::StepLimit);
        assert!(!res.terminal());
        let zero = run(&stacked(), Strategy::RoundRobin, RunOptions { max_steps: 0, verify: false }).unwrap();
        assert!(zero.trace.events.is_empty());
        assert_eq!(zero.trace.stop, StopReason::StepLimit);
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let cfg = Configuration::from_bodies([Body::Contracted(c(0, 0)), Body::Contracted(c(5, 5))]).unwrap();
        assert_eq!(run(&cfg, Strategy::RoundRobin, RunOptions::default()).unwrap_err(), EngineError::Disconnected);
    }

    #[test]
    fn trace_round_trips_and_replays() {
        let cfg = crate::generate::generate_random(14, 0.3, 0.4, 8).unwrap();
        let res = run(&cfg, Strategy::Random { seed: 3 }, RunOptions::default()).unwrap();
        let text = res.trace.to_jsonl();
        let back = Trace::parse_jsonl(&text).unwrap();
        assert_eq!(back.initial, res.trace.initial);
        assert_eq!(back.events, res.trace.events);
        assert_eq!(back, res.trace);
        let configs = back.replay().unwrap();
        assert_eq!(configs.len(), res.trace.events.len() + 1);
        assert_eq!(configs.last().unwrap(), &res.final_config);
    }

    #[test]
    fn tampered_trace_fails_replay() {
        let res = run(&stacked(), Strategy::RoundRobin, RunOptions::default()).unwrap();
        let mut trace = res.trace.clone();
        trace.events[1].after = vec![c(0, 0)];
        assert!(matches!(trace.replay(), Err(TraceError::Mismatch { step: 1, .. })));
        let mut trace = res.trace;
        trace.events.pop();
        assert!(trace.replay().is_err(), "claims terminal but is not final");
    }

    #[test]
    fn strategy_names() {
        assert_eq!(Strategy::from_name("random", 4).unwrap(), Strategy::Random { seed: 4 });
        assert_eq!(Strategy::from_name("round-robin", 0).unwrap(), Strategy::RoundRobin);
        assert_eq!(Strategy::from_name("greedy", 0).unwrap(), Strategy::GreedyAdversarial);
        assert_eq!(
            Strategy::from_name("scripted:0,2", 0).unwrap(),
            Strategy::Scripted { pids: vec![Pid(0), Pid(2)] }
        );
        assert!(matches!(Strategy::from_name("fair", 0), Err(EngineError::UnknownStrategy(_))));
    }
}
