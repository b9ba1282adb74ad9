//! The movement rule set for oblivious particles.
//!
//! A particle activation is `sense` followed by `evaluate`: the first
//! condition that holds fires. Expanded particles try E1, E2, E3, E4 in that
//! order; contracted particles try C1 then C2. The decision is a pure
//! function of the [`LocalView`], which holds offsets relative to the
//! particle's head and nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::configuration::{Body, ConfigError, Configuration, Pid};
use crate::grid::{common_neighbors, direction_between, AxisClass, Direction, NodeCoord};

/// One of the six movement conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    E1,
    E2,
    E3,
    E4,
    C1,
    C2,
}

impl ConditionId {
    pub const EXPANDED: [ConditionId; 4] = [Self::E1, Self::E2, Self::E3, Self::E4];
    pub const CONTRACTED: [ConditionId; 2] = [Self::C1, Self::C2];

    pub fn for_expanded(self) -> bool {
        matches!(self, Self::E1 | Self::E2 | Self::E3 | Self::E4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
            Self::E4 => "E4",
            Self::C1 => "C1",
            Self::C2 => "C2",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E1" => Ok(Self::E1),
            "E2" => Ok(Self::E2),
            "E3" => Ok(Self::E3),
            "E4" => Ok(Self::E4),
            "C1" => Ok(Self::C1),
            "C2" => Ok(Self::C2),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

/// Head and tail of a particle, recomputed on every activation.
///
/// The head is the lower endpoint, or the right one when both share a row.
/// Contracted particles have `head == tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientedParticle {
    pub head: NodeCoord,
    pub tail: NodeCoord,
}

impl OrientedParticle {
    pub fn is_expanded(&self) -> bool {
        self.head != self.tail
    }
}

pub fn normalize(body: Body) -> OrientedParticle {
    match body {
        Body::Contracted(a) => OrientedParticle { head: a, tail: a },
        Body::Expanded(a, b) => {
            let (head, tail) = if a.row_major() > b.row_major() {
                (a, b)
            } else {
                (b, a)
            };
            OrientedParticle { head, tail }
        }
    }
}

/// Shape part of a local view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViewShape {
    Contracted,
    /// `tail` is the direction from head to tail: W, NW or NE after normalization.
    Expanded { tail: Direction },
}

impl ViewShape {
    pub fn axis(self) -> Option<AxisClass> {
        match self {
            ViewShape::Contracted => None,
            ViewShape::Expanded { tail } => Some(tail.axis()),
        }
    }
}

/// Everything a particle may sense during one activation.
///
/// Offsets are relative to the head, which is the view origin. The view
/// covers the six neighbours of a contracted particle, or both own nodes
/// plus the eight external neighbours of an expanded one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalView {
    shape: ViewShape,
    occupied: BTreeMap<NodeCoord, bool>,
    pairs: BTreeSet<(NodeCoord, NodeCoord)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgorithmError {
    #[error("unknown particle {0}")]
    UnknownPid(Pid),
    #[error("condition {id} does not apply to a {shape} particle")]
    ShapeMismatch { id: ConditionId, shape: &'static str },
    #[error("stale decision for particle {pid}: {source}")]
    Stale {
        pid: Pid,
        #[source]
        source: ConfigError,
    },
}

impl LocalView {
    pub fn shape(&self) -> ViewShape {
        self.shape
    }

    pub fn is_expanded(&self) -> bool {
        matches!(self.shape, ViewShape::Expanded { .. })
    }

    /// Tail offset; the origin for contracted particles.
    pub fn tail(&self) -> NodeCoord {
        match self.shape {
            ViewShape::Contracted => NodeCoord::ORIGIN,
            ViewShape::Expanded { tail } => tail.offset(),
        }
    }

    /// Occupancy of a viewed offset. Own nodes count as occupied.
    pub fn is_occupied(&self, offset: NodeCoord) -> bool {
        match self.occupied.get(&offset) {
            Some(&occ) => occ,
            None => panic!("offset {offset} is outside the local view"),
        }
    }

    pub fn in_view(&self, offset: NodeCoord) -> bool {
        self.occupied.contains_key(&offset)
    }

    /// Every offset in view, own nodes included.
    pub fn offsets(&self) -> impl Iterator<Item = (NodeCoord, bool)> + '_ {
        self.occupied.iter().map(|(&o, &b)| (o, b))
    }

    fn is_own(&self, offset: NodeCoord) -> bool {
        offset == NodeCoord::ORIGIN || offset == self.tail()
    }

    /// Occupied neighbouring nodes, excluding the particle's own nodes.
    pub fn occupied_externals(&self) -> impl Iterator<Item = NodeCoord> + '_ {
        self.occupied
            .iter()
            .filter(move |(o, &occ)| occ && !self.is_own(**o))
            .map(|(&o, _)| o)
    }

    /// Whether the adjacent offsets `a` and `b` are known to be one expanded particle.
    pub fn is_pair(&self, a: NodeCoord, b: NodeCoord) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.pairs.contains(&key)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeCoord, NodeCoord)> + '_ {
        self.pairs.iter().copied()
    }

    /// Any occupied neighbour in a lower row than some own node.
    pub fn has_lower_neighbor(&self) -> bool {
        let own = [NodeCoord::ORIGIN, self.tail()];
        own.iter().any(|&n| {
            [Direction::SE, Direction::SW]
                .into_iter()
                .map(|d| n.neighbor(d))
                .any(|m| !self.is_own(m) && self.is_occupied(m))
        })
    }
}

/// The move chosen on activation. `result` is relative to the view origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Decision {
    pub condition: ConditionId,
    pub result: Body,
}

impl Decision {
    pub fn absolute(&self, origin: NodeCoord) -> Body {
        self.result.translate(origin)
    }
}

/// Builds the local view of `pid`.
pub fn sense(config: &Configuration, pid: Pid) -> Result<LocalView, AlgorithmError> {
    let body = config.body(pid).ok_or(AlgorithmError::UnknownPid(pid))?;
    let oriented = normalize(body);
    let origin = oriented.head;
    let mut shape = ViewShape::Contracted;
    let mut occupied = BTreeMap::new();
    let own: Vec<NodeCoord> = body.nodes().collect();
    if oriented.is_expanded() {
        let tail = direction_between(oriented.head, oriented.tail).expect("expanded nodes are adjacent");
        shape = ViewShape::Expanded { tail };
    }
    for &n in &own {
        occupied.insert(n - origin, true);
        for m in n.neighbors() {
            if !own.contains(&m) {
                occupied.insert(m - origin, config.is_occupied(m));
            }
        }
    }
    let mut pairs = BTreeSet::new();
    let externals: Vec<NodeCoord> = occupied
        .iter()
        .filter(|(o, &occ)| occ && !own.contains(&(**o + origin)))
        .map(|(&o, _)| o)
        .collect();
    for (i, &a) in externals.iter().enumerate() {
        for &b in &externals[i + 1..] {
            if !a.is_adjacent(b) {
                continue;
            }
            let pa = config.occupant(a + origin);
            if pa.is_some() && pa == config.occupant(b + origin) {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    Ok(LocalView {
        shape,
        occupied,
        pairs,
    })
}

/// Connectivity of a small node set under grid adjacency.
fn is_connected_set(nodes: &BTreeSet<NodeCoord>) -> bool {
    let Some(&start) = nodes.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for m in n.neighbors() {
            if nodes.contains(&m) && seen.insert(m) {
                stack.push(m);
            }
        }
    }
    seen.len() == nodes.len()
}

fn connected_with(view: &LocalView, extra: &[NodeCoord]) -> bool {
    let mut set: BTreeSet<NodeCoord> = view.occupied_externals().collect();
    set.extend(extra.iter().copied());
    is_connected_set(&set)
}

/// Checks one condition; `Ok(Some(decision))` when it holds.
pub fn condition_holds(view: &LocalView, id: ConditionId) -> Result<Option<Decision>, AlgorithmError> {
    let shape = if view.is_expanded() { "expanded" } else { "contracted" };
    if id.for_expanded() != view.is_expanded() {
        return Err(AlgorithmError::ShapeMismatch { id, shape });
    }
    let h = NodeCoord::ORIGIN;
    let t = view.tail();
    let decision = |result| Decision {
        condition: id,
        result,
    };
    let fired = match id {
        ConditionId::E1 => connected_with(view, &[h]).then(|| decision(Body::Contracted(h))),
        ConditionId::E2 => {
            let v = common_neighbors(h, t).expect("adjacent").lower();
            (!view.is_occupied(v) && connected_with(view, &[h, v]))
                .then(|| decision(Body::Expanded(h, v)))
        }
        ConditionId::E3 => {
            if view.shape().axis() != Some(AxisClass::Horizontal) {
                None
            } else {
                [Direction::SE, Direction::SW]
                    .into_iter()
                    .map(|d| t.neighbor(d))
                    .find(|&u| !view.is_occupied(u) && connected_with(view, &[t, u]))
                    .map(|u| decision(Body::Expanded(t, u)))
            }
        }
        ConditionId::E4 => {
            let diagonal = view.shape().axis().is_some_and(AxisClass::is_diagonal);
            let above = (t.neighbor(Direction::NW), t.neighbor(Direction::NE));
            let w = common_neighbors(h, t).expect("adjacent").higher();
            (diagonal
                && view.is_occupied(above.0)
                && view.is_occupied(above.1)
                && view.is_pair(above.0, above.1)
                && !view.is_occupied(w))
            .then(|| decision(Body::Expanded(h, w)))
        }
        ConditionId::C1 => {
            let se = h.neighbor(Direction::SE);
            let sw = h.neighbor(Direction::SW);
            match (view.is_occupied(se), view.is_occupied(sw)) {
                (true, false) => Some(decision(Body::Expanded(h, sw))),
                (false, true) => Some(decision(Body::Expanded(h, se))),
                _ => None,
            }
        }
        ConditionId::C2 => {
            let lower_same = view.is_occupied(h.neighbor(Direction::SE))
                == view.is_occupied(h.neighbor(Direction::SW));
            let east = h.neighbor(Direction::E);
            (lower_same && view.is_occupied(h.neighbor(Direction::NE)) && !view.is_occupied(east))
                .then(|| decision(Body::Expanded(h, east)))
        }
    };
    Ok(fired)
}

/// First condition that holds, in evaluation order.
pub fn evaluate(view: &LocalView) -> Option<Decision> {
    let order: &[ConditionId] = if view.is_expanded() {
        &ConditionId::EXPANDED
    } else {
        &ConditionId::CONTRACTED
    };
    order
        .iter()
        .find_map(|&id| condition_holds(view, id).expect("order matches shape"))
}

/// `evaluate(sense(config, pid))`.
pub fn decide(config: &Configuration, pid: Pid) -> Result<Option<Decision>, AlgorithmError> {
    sense(config, pid).map(|view| evaluate(&view))
}

/// Absolute body the particle occupies after `decision`.
pub fn resulting_body(config: &Configuration, pid: Pid, decision: &Decision) -> Result<Body, AlgorithmError> {
    let body = config.body(pid).ok_or(AlgorithmError::UnknownPid(pid))?;
    Ok(decision.absolute(normalize(body).head))
}

/// Applies `decision` atomically, returning the new configuration.
pub fn apply_move(config: &Configuration, pid: Pid, decision: &Decision) -> Result<Configuration, AlgorithmError> {
    let target = resulting_body(config, pid, decision)?;
    let mut next = config.clone();
    next.relocate(pid, target)
        .map_err(|source| AlgorithmError::Stale { pid, source })?;
    Ok(next)
}
