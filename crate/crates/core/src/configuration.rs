//! The global particle system.
//!
//! A [`Configuration`] owns every particle body together with an occupancy
//! index. Particle ids are harness bookkeeping only; nothing in
//! [`crate::algorithm`] reads them.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{direction_between, AxisClass, NodeCoord};

/// Stable particle handle, assigned in file order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pid(pub u32);

impl fmt::Debug for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The node(s) a particle occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Body {
    Contracted(NodeCoord),
    /// Two adjacent nodes; the order carries no meaning.
    Expanded(NodeCoord, NodeCoord),
}

impl Body {
    /// Builds a body from one or two nodes, checking adjacency.
    pub fn from_nodes(nodes: &[NodeCoord]) -> Option<Body> {
        match *nodes {
            [a] => Some(Body::Contracted(a)),
            [a, b] if a.is_adjacent(b) => Some(Body::Expanded(a, b)),
            _ => None,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeCoord> + Clone {
        let (a, b) = match *self {
            Body::Contracted(a) => (a, None),
            Body::Expanded(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    /// Nodes in row-major order.
    pub fn sorted_nodes(&self) -> Vec<NodeCoord> {
        let mut v: Vec<_> = self.nodes().collect();
        v.sort_by_key(|n| n.row_major());
        v
    }

    /// Same body with the nodes of an expanded particle in row-major order.
    pub fn normalized(&self) -> Body {
        match *self {
            Body::Expanded(a, b) if b.row_major() < a.row_major() => Body::Expanded(b, a),
            other => other,
        }
    }

    pub fn contains(&self, node: NodeCoord) -> bool {
        self.nodes().any(|n| n == node)
    }

    pub fn is_expanded(&self) -> bool {
        matches!(self, Body::Expanded(..))
    }

    pub fn axis(&self) -> Option<AxisClass> {
        match *self {
            Body::Contracted(_) => None,
            Body::Expanded(a, b) => direction_between(a, b).map(|d| d.axis()),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.axis().is_some_and(AxisClass::is_diagonal)
    }

    pub fn is_horizontal(&self) -> bool {
        self.axis() == Some(AxisClass::Horizontal)
    }

    /// Smallest node in row-major order; the canonical sort key.
    pub fn anchor(&self) -> NodeCoord {
        self.nodes().min_by_key(|n| n.row_major()).unwrap()
    }

    pub fn translate(&self, t: NodeCoord) -> Body {
        match *self {
            Body::Contracted(a) => Body::Contracted(a + t),
            Body::Expanded(a, b) => Body::Expanded(a + t, b + t),
        }
    }

    /// Same nodes regardless of stored order.
    pub fn same_nodes(&self, other: &Body) -> bool {
        self.sorted_nodes() == other.sorted_nodes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Particle {
    pub pid: Pid,
    pub body: Body,
}

/// Frozen boundaries of an execution: the lowest occupied row and the
/// rightmost occupied north-west/south-east diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Boundaries {
    pub r_max: i64,
    pub q_max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed configuration at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("particles[{index}]: node {node} is already occupied")]
    DuplicateNode { index: usize, node: NodeCoord },
    #[error("particles[{index}]: expanded nodes {a} and {b} are not adjacent")]
    NotAdjacent {
        index: usize,
        a: NodeCoord,
        b: NodeCoord,
    },
    #[error("particles[{index}]: expected 1 or 2 nodes, found {count}")]
    NodeCount { index: usize, count: usize },
    #[error("configuration is not connected")]
    Disconnected,
    #[error("configuration is empty")]
    Empty,
    #[error("unknown particle {0}")]
    UnknownPid(Pid),
    #[error("node {node} needed by particle {pid} is occupied by particle {by}")]
    Occupied { pid: Pid, node: NodeCoord, by: Pid },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    particles: Vec<ParticleEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleEntry {
    nodes: Vec<NodeCoord>,
}

/// Particle bodies plus an occupancy index.
#[derive(Clone, Debug, Default)]
pub struct Configuration {
    particles: BTreeMap<Pid, Body>,
    occupancy: HashMap<NodeCoord, Pid>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.particles == other.particles
    }
}

impl Eq for Configuration {}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a configuration with pids `0..n` in iteration order.
    pub fn from_bodies(bodies: impl IntoIterator<Item = Body>) -> Result<Self, ConfigError> {
        let mut config = Configuration::new();
        for (index, body) in bodies.into_iter().enumerate() {
            if let Body::Expanded(a, b) = body {
                if !a.is_adjacent(b) {
                    return Err(ConfigError::NotAdjacent { index, a, b });
                }
            }
            config
                .insert(Pid(index as u32), body)
                .map_err(|node| ConfigError::DuplicateNode { index, node })?;
        }
        Ok(config)
    }

    fn insert(&mut self, pid: Pid, body: Body) -> Result<(), NodeCoord> {
        if let Some(n) = body.nodes().find(|n| self.occupancy.contains_key(n)) {
            return Err(n);
        }
        if let Body::Expanded(a, b) = body {
            if a == b {
                return Err(a);
            }
        }
        for n in body.nodes() {
            self.occupancy.insert(n, pid);
        }
        self.particles.insert(pid, body.normalized());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn pids(&self) -> impl Iterator<Item = Pid> + '_ {
        self.particles.keys().copied()
    }

    pub fn particles(&self) -> impl Iterator<Item = Particle> + '_ {
        self.particles
            .iter()
            .map(|(&pid, &body)| Particle { pid, body })
    }

    pub fn body(&self, pid: Pid) -> Option<Body> {
        self.particles.get(&pid).copied()
    }

    pub fn occupant(&self, node: NodeCoord) -> Option<Pid> {
        self.occupancy.get(&node).copied()
    }

    pub fn is_occupied(&self, node: NodeCoord) -> bool {
        self.occupancy.contains_key(&node)
    }

    /// All occupied nodes in row-major order.
    pub fn nodes(&self) -> Vec<NodeCoord> {
        let mut v: Vec<_> = self.occupancy.keys().copied().collect();
        v.sort_by_key(|n| n.row_major());
        v
    }

    pub fn node_count(&self) -> usize {
        self.occupancy.len()
    }

    /// Replaces the body of `pid` in place. On error nothing changes.
    pub fn relocate(&mut self, pid: Pid, body: Body) -> Result<(), ConfigError> {
        let old = self.body(pid).ok_or(ConfigError::UnknownPid(pid))?;
        for n in body.nodes() {
            if let Some(by) = self.occupant(n).filter(|&by| by != pid) {
                return Err(ConfigError::Occupied { pid, node: n, by });
            }
        }
        for n in old.nodes() {
            self.occupancy.remove(&n);
        }
        for n in body.nodes() {
            self.occupancy.insert(n, pid);
        }
        self.particles.insert(pid, body.normalized());
        Ok(())
    }

    pub fn translate(&self, t: NodeCoord) -> Configuration {
        let mut out = Configuration::new();
        for (&pid, body) in &self.particles {
            out.insert(pid, body.translate(t))
                .expect("translation preserves disjointness");
        }
        out
    }

    /// True iff the occupied nodes induce a connected subgraph of the grid.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.occupancy.keys().next() else {
            return true;
        };
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for m in n.neighbors() {
                if self.is_occupied(m) && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen.len() == self.occupancy.len()
    }

    pub fn boundaries(&self) -> Result<Boundaries, ConfigError> {
        let r_max = self.occupancy.keys().map(|n| n.r).max();
        let q_max = self.occupancy.keys().map(|n| n.q).max();
        match (r_max, q_max) {
            (Some(r_max), Some(q_max)) => Ok(Boundaries { r_max, q_max }),
            _ => Err(ConfigError::Empty),
        }
    }

    /// Empty nodes enclosed by the configuration, found by flood-filling the
    /// empty nodes of a one-node margin around the axial bounding box.
    pub fn holes(&self) -> Vec<NodeCoord> {
        if self.is_empty() {
            return Vec::new();
        }
        let keys = self.occupancy.keys();
        let (q0, q1) = keys.clone().fold((i64::MAX, i64::MIN), |(lo, hi), n| {
            (lo.min(n.q), hi.max(n.q))
        });
        let (r0, r1) = keys.fold((i64::MAX, i64::MIN), |(lo, hi), n| {
            (lo.min(n.r), hi.max(n.r))
        });
        let (q0, q1, r0, r1) = (q0 - 1, q1 + 1, r0 - 1, r1 + 1);
        let inside = |n: NodeCoord| (q0..=q1).contains(&n.q) && (r0..=r1).contains(&n.r);
        let start = NodeCoord::new(q0, r0);
        let mut outside = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for m in n.neighbors() {
                if inside(m) && !self.is_occupied(m) && outside.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        let mut holes = Vec::new();
        for r in r0..=r1 {
            for q in q0..=q1 {
                let n = NodeCoord::new(q, r);
                if !self.is_occupied(n) && !outside.contains(&n) {
                    holes.push(n);
                }
            }
        }
        holes
    }

    pub fn has_hole(&self) -> bool {
        !self.holes().is_empty()
    }

    /// Parses the JSON configuration format. Pids follow file order.
    pub fn parse(text: &str) -> Result<Configuration, ConfigError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut config = Configuration::new();
        for (index, entry) in file.particles.into_iter().enumerate() {
            let body = match entry.nodes[..] {
                [a] => Body::Contracted(a),
                [a, b] if a.is_adjacent(b) => Body::Expanded(a, b),
                [a, b] => return Err(ConfigError::NotAdjacent { index, a, b }),
                _ => {
                    return Err(ConfigError::NodeCount {
                        index,
                        count: entry.nodes.len(),
                    })
                }
            };
            config
                .insert(Pid(index as u32), body)
                .map_err(|node| ConfigError::DuplicateNode { index, node })?;
        }
        Ok(config)
    }

    /// Canonical JSON: particles sorted by their smallest node (row-major),
    /// nodes within a particle sorted the same way.
    pub fn to_json(&self) -> String {
        let file = ConfigFile {
            particles: self
                .canonical_bodies()
                .into_iter()
                .map(|b| ParticleEntry {
                    nodes: b.sorted_nodes(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("configuration serializes")
    }

    /// JSON in pid order, so parsing it back reproduces the same pids.
    pub fn to_json_by_pid(&self) -> String {
        let file = ConfigFile {
            particles: self
                .particles
                .values()
                .map(|b| ParticleEntry {
                    nodes: b.sorted_nodes(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("configuration serializes")
    }

    /// Bodies in canonical order with nodes normalised.
    pub fn canonical_bodies(&self) -> Vec<Body> {
        let mut bodies: Vec<Body> = self
            .particles
            .values()
            .copied()
            .collect();
        bodies.sort_by_key(|b| b.anchor().row_major());
        bodies
    }

    /// Node to pid map in row-major order, for reports.
    pub fn occupancy(&self) -> Vec<(NodeCoord, Pid)> {
        let mut v: Vec<_> = self.occupancy.iter().map(|(&n, &p)| (n, p)).collect();
        v.sort_by_key(|(n, _)| n.row_major());
        v
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}
