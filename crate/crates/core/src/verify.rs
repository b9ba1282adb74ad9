//! Runtime correctness checks: the progress vector, leader predicate,
//! final-configuration shape and per-transition invariants.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithm::{self, normalize, ConditionId};
use crate::configuration::{Body, Boundaries, Configuration, Pid};
use crate::engine::{activable, StepEvent};
use crate::grid::{Direction, NodeCoord};

/// Lexicographic termination measure `(p1, .., p5)`.
///
/// `p1`/`p2` sum the head distances to the frozen vertical and diagonal
/// boundaries; `p3`, `p4`, `p5` count diagonally expanded, blocking and
/// horizontally expanded particles. Field order is the comparison order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 5]", into = "[i64; 5]")]
pub struct ProgressVector {
    pub p1: i64,
    pub p2: i64,
    pub p3: i64,
    pub p4: i64,
    pub p5: i64,
}

impl From<[i64; 5]> for ProgressVector {
    fn from([p1, p2, p3, p4, p5]: [i64; 5]) -> Self {
        Self { p1, p2, p3, p4, p5 }
    }
}

impl From<ProgressVector> for [i64; 5] {
    fn from(v: ProgressVector) -> Self {
        [v.p1, v.p2, v.p3, v.p4, v.p5]
    }
}

impl fmt::Display for ProgressVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.p1, self.p2, self.p3, self.p4, self.p5)
    }
}

/// Name of a checked invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Connectivity,
    Progress,
    Boundary,
    Atomicity,
    Sequential,
    LowerMove,
    Downward,
    FinalShape,
    UniqueLeader,
    Replay,
}

impl Invariant {
    pub fn as_str(self) -> &'static str {
        match self {
            Invariant::Connectivity => "connectivity",
            Invariant::Progress => "progress",
            Invariant::Boundary => "boundary",
            Invariant::Atomicity => "atomicity",
            Invariant::Sequential => "sequential",
            Invariant::LowerMove => "lower_move",
            Invariant::Downward => "downward",
            Invariant::FinalShape => "final_shape",
            Invariant::UniqueLeader => "unique_leader",
            Invariant::Replay => "replay",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid: Option<Pid>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub nodes: Vec<NodeCoord>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self {
            passed: true,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, invariant: Invariant, pid: Option<Pid>, nodes: Vec<NodeCoord>, detail: impl Into<String>) {
        self.passed = false;
        self.violations.push(Violation {
            invariant,
            pid,
            nodes,
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.passed &= other.passed;
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.invariant.as_str())?;
        if let Some(pid) = self.pid {
            write!(f, " pid={pid}")?;
        }
        if !self.nodes.is_empty() {
            let nodes: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
            write!(f, " nodes={}", nodes.join(","))?;
        }
        write!(f, ": {}", self.detail)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            return writeln!(f, "check: passed");
        }
        writeln!(f, "check: FAILED ({} violations)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("particle {pid} occupies {node}, beyond the frozen boundaries {boundaries:?}")]
    OutsideBoundaries {
        pid: Pid,
        node: NodeCoord,
        boundaries: Boundaries,
    },
    #[error("configuration is not final: particles {0:?} are activable")]
    NotFinal(Vec<Pid>),
}

/// A diagonally expanded particle whose tail neighbours both nodes of some
/// other expanded particle.
pub fn is_blocking(config: &Configuration, pid: Pid) -> bool {
    let Some(body) = config.body(pid) else {
        return false;
    };
    if !body.is_diagonal() {
        return false;
    }
    let tail = normalize(body).tail;
    config.particles().any(|other| match other.body {
        Body::Expanded(a, b) if other.pid != pid => a.is_adjacent(tail) && b.is_adjacent(tail),
        _ => false,
    })
}

/// The progress vector without the boundary precondition; components may be
/// negative when a node lies beyond the boundaries.
pub fn progress_vector_unchecked(config: &Configuration, b: Boundaries) -> ProgressVector {
    let mut v = ProgressVector::from([0; 5]);
    for p in config.particles() {
        let head = normalize(p.body).head;
        v.p1 += b.r_max - head.r;
        v.p2 += b.q_max - head.q;
        match p.body.axis() {
            Some(axis) if axis.is_diagonal() => {
                v.p3 += 1;
                if is_blocking(config, p.pid) {
                    v.p4 += 1;
                }
            }
            Some(_) => v.p5 += 1,
            None => {}
        }
    }
    v
}

/// First occupied node beyond the frozen boundaries, if any.
pub fn boundary_breach(config: &Configuration, b: Boundaries) -> Option<(Pid, NodeCoord)> {
    config
        .occupancy()
        .into_iter()
        .find(|(n, _)| n.r > b.r_max || n.q > b.q_max)
        .map(|(n, p)| (p, n))
}

pub fn progress_vector(config: &Configuration, b: Boundaries) -> Result<ProgressVector, VerifyError> {
    if let Some((pid, node)) = boundary_breach(config, b) {
        return Err(VerifyError::OutsideBoundaries {
            pid,
            node,
            boundaries: b,
        });
    }
    Ok(progress_vector_unchecked(config, b))
}

pub fn is_final(config: &Configuration) -> bool {
    activable(config).is_empty()
}

const LEADER_FREE: [Direction; 4] = [Direction::E, Direction::SE, Direction::SW, Direction::NE];

/// Particles with no occupied node in directions 0, 1, 2 or 5 of any endpoint.
pub fn leaders(config: &Configuration) -> BTreeSet<Pid> {
    config
        .particles()
        .filter(|p| {
            p.body.nodes().all(|n| {
                LEADER_FREE
                    .iter()
                    .map(|&d| n.neighbor(d))
                    .all(|m| p.body.contains(m) || !config.is_occupied(m))
            })
        })
        .map(|p| p.pid)
        .collect()
}

fn occupied_lower(config: &Configuration, body: &Body) -> Vec<NodeCoord> {
    body.nodes()
        .flat_map(|n| [n.neighbor(Direction::SE), n.neighbor(Direction::SW)])
        .filter(|m| !body.contains(*m) && config.is_occupied(*m))
        .collect()
}

/// Shape of every particle in a final configuration plus leader uniqueness.
pub fn check_final_properties(config: &Configuration) -> Result<CheckReport, VerifyError> {
    let active = activable(config);
    if !active.is_empty() {
        return Err(VerifyError::NotFinal(active.iter().map(|a| a.pid).collect()));
    }
    let mut report = CheckReport::new();
    for p in config.particles() {
        let lower = occupied_lower(config, &p.body);
        match p.body {
            Body::Contracted(_) => {
                if lower.len() == 1 {
                    report.push(
                        Invariant::FinalShape,
                        Some(p.pid),
                        lower,
                        "contracted particle with exactly one lower neighbour",
                    );
                }
            }
            Body::Expanded(..) if p.body.is_diagonal() => {
                report.push(
                    Invariant::FinalShape,
                    Some(p.pid),
                    p.body.sorted_nodes(),
                    "diagonally expanded particle in a final configuration",
                );
            }
            Body::Expanded(..) => {
                let view = algorithm::sense(config, p.pid).expect("pid exists");
                let e1 = algorithm::condition_holds(&view, ConditionId::E1).expect("expanded view");
                if e1.is_some() {
                    report.push(
                        Invariant::FinalShape,
                        Some(p.pid),
                        p.body.sorted_nodes(),
                        "horizontally expanded particle could contract",
                    );
                }
                if !lower.is_empty() {
                    report.push(
                        Invariant::FinalShape,
                        Some(p.pid),
                        lower,
                        "horizontally expanded particle with a lower neighbour",
                    );
                }
            }
        }
    }
    let leaders = leaders(config);
    if leaders.len() != 1 {
        report.push(
            Invariant::UniqueLeader,
            None,
            Vec::new(),
            format!("expected exactly one leader, found {:?}", leaders),
        );
    }
    Ok(report)
}

/// Invariants of one transition that do not depend on the frozen boundaries:
/// connectivity, atomicity, sequentiality, strict lexicographic progress,
/// the lower-neighbour rule for contracted movers and the no-upward-move discipline.
pub fn check_transition_local(before: &Configuration, after: &Configuration, event: &StepEvent) -> CheckReport {
    let mut report = CheckReport::new();
    let pid = event.pid;
    let (Some(old), Some(new)) = (before.body(pid), after.body(pid)) else {
        report.push(Invariant::Sequential, Some(pid), Vec::new(), "mover missing from configuration");
        return report;
    };

    if !after.is_connected() {
        report.push(Invariant::Connectivity, Some(pid), new.sorted_nodes(), "configuration disconnected after move");
    }

    let changed: Vec<Pid> = before
        .pids()
        .filter(|&p| {
            let (a, b) = (before.body(p), after.body(p));
            match (a, b) {
                (Some(a), Some(b)) => !a.same_nodes(&b),
                _ => true,
            }
        })
        .collect();
    if changed != [pid] || before.len() != after.len() {
        report.push(
            Invariant::Sequential,
            Some(pid),
            Vec::new(),
            format!("expected only particle {pid} to move, changed: {changed:?}"),
        );
    }
    if event.before != old.sorted_nodes() || event.after != new.sorted_nodes() {
        report.push(
            Invariant::Replay,
            Some(pid),
            event.after.clone(),
            "event nodes do not match the configurations",
        );
    }

    let kept = old.nodes().any(|n| new.contains(n));
    if !kept {
        report.push(
            Invariant::Atomicity,
            Some(pid),
            new.sorted_nodes(),
            "move kept none of the previously occupied nodes",
        );
    }

    // Frame-independent: both vectors use the same (arbitrary) boundaries.
    let frame = before.boundaries().expect("non-empty");
    let pv_before = progress_vector_unchecked(before, frame);
    let pv_after = progress_vector_unchecked(after, frame);
    if pv_after >= pv_before {
        report.push(
            Invariant::Progress,
            Some(pid),
            new.sorted_nodes(),
            format!("progress vector did not strictly decrease: {pv_before} -> {pv_after} ({})", event.condition),
        );
    }

    if let Body::Contracted(c) = old {
        let went_lower = new.nodes().any(|n| n.r > c.r);
        let had_lower = [Direction::SE, Direction::SW]
            .iter()
            .any(|&d| before.is_occupied(c.neighbor(d)));
        if went_lower && !had_lower {
            report.push(
                Invariant::LowerMove,
                Some(pid),
                vec![c],
                "contracted particle moved lower without a lower neighbour",
            );
        }
        if let Some(&added) = new.nodes().collect::<Vec<_>>().iter().find(|&&n| n != c) {
            if added == c.neighbor(Direction::E) && event.condition != ConditionId::C2 {
                report.push(
                    Invariant::Downward,
                    Some(pid),
                    vec![added],
                    format!("direction-0 expansion under {}", event.condition),
                );
            }
        }
    }
    let top = |b: &Body| b.nodes().map(|n| n.r).min().unwrap();
    let bottom = |b: &Body| b.nodes().map(|n| n.r).max().unwrap();
    if top(&new) < top(&old) || bottom(&new) < bottom(&old) {
        report.push(
            Invariant::Downward,
            Some(pid),
            new.sorted_nodes(),
            "particle moved upward",
        );
    }
    report
}

/// All per-step invariants, including frozen-boundary containment.
pub fn check_transition(before: &Configuration, after: &Configuration, event: &StepEvent, boundaries: Boundaries) -> CheckReport {
    let mut report = check_transition_local(before, after, event);
    if let Some((pid, node)) = boundary_breach(after, boundaries) {
        report.push(
            Invariant::Boundary,
            Some(pid),
            vec![node],
            format!("node beyond frozen boundaries r_max={} q_max={}", boundaries.r_max, boundaries.q_max),
        );
    }
    if let Some(recorded) = event.progress {
        let actual = progress_vector_unchecked(after, boundaries);
        if recorded != actual {
            report.push(
                Invariant::Replay,
                Some(event.pid),
                Vec::new(),
                format!("recorded progress {recorded} differs from recomputed {actual}"),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{apply_move, decide};
    use crate::engine::StepEvent;

    fn c(q: i64, r: i64) -> NodeCoord {
        NodeCoord::new(q, r)
    }

    fn config(bodies: &[&[(i64, i64)]]) -> Configuration {
        Configuration::from_bodies(bodies.iter().map(|nodes| {
            let ns: Vec<_> = nodes.iter().map(|&(q, r)| c(q, r)).collect();
            Body::from_nodes(&ns).unwrap()
        }))
        .unwrap()
    }

    /// Term-by-term oracle straight from the definitions.
    fn pv_oracle(cfg: &Configuration, b: Boundaries) -> [i64; 5] {
        let mut out = [0; 5];
        for p in cfg.particles() {
            let nodes = p.body.sorted_nodes();
            let head = *nodes.last().unwrap();
            out[0] += b.r_max - head.r;
            out[1] += b.q_max - head.q;
            if nodes.len() == 2 {
                if nodes[0].r != nodes[1].r {
                    out[2] += 1;
                    let tail = nodes[0];
                    let blocked = cfg.particles().any(|o| {
                        let on = o.body.sorted_nodes();
                        o.pid != p.pid && on.len() == 2 && on.iter().all(|n| n.is_adjacent(tail))
                    });
                    if blocked {
                        out[3] += 1;
                    }
                } else {
                    out[4] += 1;
                }
            }
        }
        out
    }

    fn step(cfg: &Configuration, pid: u32) -> (Configuration, StepEvent) {
        let pid = Pid(pid);
        let d = decide(cfg, pid).unwrap().unwrap();
        let next = apply_move(cfg, pid, &d).unwrap();
        let event = StepEvent {
            step: 0,
            pid,
            condition: d.condition,
            before: cfg.body(pid).unwrap().sorted_nodes(),
            after: next.body(pid).unwrap().sorted_nodes(),
            progress: None,
        };
        (next, event)
    }

    #[test]
    fn progress_vector_examples() {
        let single = config(&[&[(0, 0)]]);
        let b = single.boundaries().unwrap();
        assert_eq!(progress_vector(&single, b).unwrap(), [0; 5].into());

        let two = config(&[&[(0, 0)], &[(1, -1)]]);
        let b = Boundaries { r_max: 0, q_max: 1 };
        assert_eq!(pv_oracle(&two, b), [1, 1, 0, 0, 0]);
        assert_eq!(progress_vector(&two, b).unwrap(), [1, 1, 0, 0, 0].into());

        let blocking = config(&[&[(0, 0), (1, 0)], &[(0, 1), (0, 2)]]);
        let b = blocking.boundaries().unwrap();
        let pv = progress_vector(&blocking, b).unwrap();
        assert_eq!(<[i64; 5]>::from(pv), pv_oracle(&blocking, b));
        assert_eq!((pv.p3, pv.p4, pv.p5), (1, 1, 1));
        assert!(is_blocking(&blocking, Pid(1)));
        assert!(!is_blocking(&blocking, Pid(0)));
    }

    #[test]
    fn progress_vector_rejects_breach() {
        let cfg = config(&[&[(0, 0)], &[(0, 1)]]);
        let b = Boundaries { r_max: 0, q_max: 5 };
        assert!(matches!(
            progress_vector(&cfg, b),
            Err(VerifyError::OutsideBoundaries { pid: Pid(1), .. })
        ));
    }

    #[test]
    fn final_and_leaders() {
        let single = config(&[&[(0, 0)]]);
        assert!(is_final(&single));
        assert_eq!(leaders(&single), BTreeSet::from([Pid(0)]));
        assert!(check_final_properties(&single).unwrap().passed);

        let stacked = config(&[&[(0, 0)], &[(0, 1)]]);
        assert!(!is_final(&stacked));
        assert!(matches!(
            check_final_properties(&stacked),
            Err(VerifyError::NotFinal(p)) if p == vec![Pid(0)]
        ));

        let done = config(&[&[(-1, 1)], &[(0, 1)]]);
        assert!(is_final(&done));
        assert_eq!(leaders(&done), BTreeSet::from([Pid(1)]));
        assert!(check_final_properties(&done).unwrap().passed);
    }

    #[test]
    fn transition_examples() {
        let stacked = config(&[&[(0, 0)], &[(0, 1)]]);
        let b = stacked.boundaries().unwrap();
        let (next, ev) = step(&stacked, 0);
        let before = progress_vector(&stacked, b).unwrap();
        let after = progress_vector(&next, b).unwrap();
        assert_eq!((before.p1, after.p1), (1, 0));
        assert!(after < before);
        assert!(check_transition(&stacked, &next, &ev, b).passed);

        let c2 = config(&[&[(0, 0)], &[(1, -1)]]);
        let b = c2.boundaries().unwrap();
        let (next, ev) = step(&c2, 0);
        assert_eq!(ev.condition, ConditionId::C2);
        let (pb, pa) = (progress_vector(&c2, b).unwrap(), progress_vector(&next, b).unwrap());
        assert_eq!(pa.p1, pb.p1);
        assert_eq!(pa.p2, pb.p2 - 1);
        assert!(check_transition(&c2, &next, &ev, b).passed);

        let diag = config(&[&[(0, 0), (0, 1)], &[(1, 0)]]);
        let b = diag.boundaries().unwrap();
        let (next, ev) = step(&diag, 0);
        assert_eq!(ev.condition, ConditionId::E1);
        let (pb, pa) = (progress_vector(&diag, b).unwrap(), progress_vector(&next, b).unwrap());
        assert_eq!((pa.p1, pa.p2), (pb.p1, pb.p2));
        assert_eq!(pa.p3, pb.p3 - 1);
        assert!(check_transition(&diag, &next, &ev, b).passed);
    }

    #[test]
    fn transition_violations_are_reported() {
        let stacked = config(&[&[(0, 0)], &[(0, 1)]]);
        let b = stacked.boundaries().unwrap();
        let (next, mut ev) = step(&stacked, 0);
        // Recorded as the wrong particle.
        ev.pid = Pid(1);
        let report = check_transition(&stacked, &next, &ev, b);
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.invariant == Invariant::Sequential));

        // A hand-made disconnecting, non-improving jump.
        let far = config(&[&[(0, 0)], &[(5, 1)]]);
        let ev = StepEvent {
            step: 0,
            pid: Pid(1),
            condition: ConditionId::C1,
            before: vec![c(0, 1)],
            after: vec![c(5, 1)],
            progress: None,
        };
        let report = check_transition(&stacked, &far, &ev, b);
        let names: BTreeSet<_> = report.violations.iter().map(|v| v.invariant).collect();
        assert!(names.contains(&Invariant::Connectivity));
        assert!(names.contains(&Invariant::Atomicity));
        assert!(names.contains(&Invariant::Boundary));
        assert!(report.to_string().contains("FAILED"));
    }

    #[test]
    fn no_expanded_particles_means_zero_shape_counts() {
        let cfg = crate::generate::generate_random(20, 0.0, 0.5, 3).unwrap();
        let pv = progress_vector(&cfg, cfg.boundaries().unwrap()).unwrap();
        assert_eq!((pv.p3, pv.p4, pv.p5), (0, 0, 0));
    }

    #[test]
    fn progress_vector_matches_oracle_on_generated() {
        for seed in 0..200 {
            let cfg = crate::generate::generate_random(15, 0.5, 0.3, seed).unwrap();
            let b = cfg.boundaries().unwrap();
            let pv = progress_vector(&cfg, b).unwrap();
            assert_eq!(<[i64; 5]>::from(pv), pv_oracle(&cfg, b), "seed {seed}");
            assert!(pv.p4 <= pv.p3 && pv.p3 + pv.p5 <= cfg.len() as i64);
            let t = c(11, -4);
            let moved = cfg.translate(t);
            let bt = moved.boundaries().unwrap();
            assert_eq!(progress_vector(&moved, bt).unwrap(), pv);
            let shifted: BTreeSet<Pid> = leaders(&moved);
            assert_eq!(shifted, leaders(&cfg));
        }
    }
}
