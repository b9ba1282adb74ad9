//! Geometry of the infinite triangular grid.
//!
//! Nodes use axial coordinates `(q, r)`. `r` is the row index and grows
//! downward, so "lower" always means a larger `r`. The north-west to
//! south-east diagonals are the lines of constant `q`.
//!
//! ```text
//!        4   5
//!         \ /
//!     3 -- * -- 0
//!         / \
//!        2   1
//! ```

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// A node of the triangular grid in axial coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct NodeCoord {
    pub q: i64,
    pub r: i64,
}

impl NodeCoord {
    pub const ORIGIN: NodeCoord = NodeCoord { q: 0, r: 0 };

    pub const fn new(q: i64, r: i64) -> Self {
        Self { q, r }
    }

    pub fn neighbor(self, d: Direction) -> NodeCoord {
        self + d.offset()
    }

    pub fn neighbors(self) -> impl Iterator<Item = NodeCoord> {
        Direction::ALL.into_iter().map(move |d| self.neighbor(d))
    }

    pub fn is_adjacent(self, other: NodeCoord) -> bool {
        direction_between(self, other).is_some()
    }

    /// Row-major key used for canonical orderings: top row first, left to right.
    pub fn row_major(self) -> (i64, i64) {
        (self.r, self.q)
    }

    /// Cartesian position for drawing; `y` grows downward like `r`.
    pub fn cartesian(self) -> (f64, f64) {
        (
            self.q as f64 + self.r as f64 / 2.0,
            self.r as f64 * 3f64.sqrt() / 2.0,
        )
    }
}

impl fmt::Debug for NodeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

impl fmt::Display for NodeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

impl Add for NodeCoord {
    type Output = NodeCoord;
    fn add(self, rhs: NodeCoord) -> NodeCoord {
        NodeCoord::new(self.q + rhs.q, self.r + rhs.r)
    }
}

impl Sub for NodeCoord {
    type Output = NodeCoord;
    fn sub(self, rhs: NodeCoord) -> NodeCoord {
        NodeCoord::new(self.q - rhs.q, self.r - rhs.r)
    }
}

impl From<[i64; 2]> for NodeCoord {
    fn from([q, r]: [i64; 2]) -> Self {
        NodeCoord::new(q, r)
    }
}

impl From<NodeCoord> for [i64; 2] {
    fn from(c: NodeCoord) -> Self {
        [c.q, c.r]
    }
}

/// One of the six directions shared by every particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(u8);

impl Direction {
    pub const E: Direction = Direction(0);
    pub const SE: Direction = Direction(1);
    pub const SW: Direction = Direction(2);
    pub const W: Direction = Direction(3);
    pub const NW: Direction = Direction(4);
    pub const NE: Direction = Direction(5);

    pub const ALL: [Direction; 6] = [
        Direction(0),
        Direction(1),
        Direction(2),
        Direction(3),
        Direction(4),
        Direction(5),
    ];

    const OFFSETS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

    /// Returns `None` unless `value < 6`.
    pub fn new(value: u8) -> Option<Direction> {
        (value < 6).then_some(Direction(value))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn offset(self) -> NodeCoord {
        let (q, r) = Self::OFFSETS[self.0 as usize];
        NodeCoord::new(q, r)
    }

    pub fn opposite(self) -> Direction {
        Direction((self.0 + 3) % 6)
    }

    /// Next direction counter-clockwise in index order (`d + 1 mod 6`).
    pub fn next(self) -> Direction {
        Direction((self.0 + 1) % 6)
    }

    pub fn prev(self) -> Direction {
        Direction((self.0 + 5) % 6)
    }

    pub fn is_lower(self) -> bool {
        matches!(self.0, 1 | 2)
    }

    pub fn is_upper(self) -> bool {
        matches!(self.0, 4 | 5)
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self.0, 0 | 3)
    }

    pub fn axis(self) -> AxisClass {
        match self.0 % 3 {
            0 => AxisClass::Horizontal,
            1 => AxisClass::DiagonalSE,
            _ => AxisClass::DiagonalSW,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// The grid axis along which an expanded particle lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisClass {
    /// The 0/3 axis.
    Horizontal,
    /// The 1/4 axis.
    DiagonalSE,
    /// The 2/5 axis.
    DiagonalSW,
}

impl AxisClass {
    pub fn is_diagonal(self) -> bool {
        !matches!(self, AxisClass::Horizontal)
    }
}

pub fn neighbor(c: NodeCoord, d: Direction) -> NodeCoord {
    c.neighbor(d)
}

pub fn direction_between(a: NodeCoord, b: NodeCoord) -> Option<Direction> {
    let delta = b - a;
    Direction::ALL.into_iter().find(|d| d.offset() == delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("nodes {0} and {1} are not adjacent")]
pub struct NotAdjacent(pub NodeCoord, pub NodeCoord);

/// The two nodes adjacent to both `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommonNeighbors(pub NodeCoord, pub NodeCoord);

impl CommonNeighbors {
    /// The common neighbour in the lower row. For a diagonal pair the two
    /// candidates sit on different rows; for a horizontal pair one is above
    /// and one below.
    pub fn lower(self) -> NodeCoord {
        if self.0.row_major() > self.1.row_major() {
            self.0
        } else {
            self.1
        }
    }

    pub fn higher(self) -> NodeCoord {
        if self.0.row_major() > self.1.row_major() {
            self.1
        } else {
            self.0
        }
    }

    pub fn contains(self, c: NodeCoord) -> bool {
        self.0 == c || self.1 == c
    }
}

pub fn common_neighbors(a: NodeCoord, b: NodeCoord) -> Result<CommonNeighbors, NotAdjacent> {
    let d = direction_between(a, b).ok_or(NotAdjacent(a, b))?;
    Ok(CommonNeighbors(a.neighbor(d.prev()), a.neighbor(d.next())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn c(q: i64, r: i64) -> NodeCoord {
        NodeCoord::new(q, r)
    }

    /// Brute force: intersect the two 6-neighbourhoods.
    fn common_by_intersection(a: NodeCoord, b: NodeCoord) -> BTreeSet<NodeCoord> {
        let na: BTreeSet<_> = a.neighbors().collect();
        b.neighbors().filter(|n| na.contains(n)).collect()
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(neighbor(c(0, 0), Direction::E), c(1, 0));
        assert_eq!(neighbor(c(0, 0), Direction::SE), c(0, 1));
        assert_eq!(neighbor(c(2, -1), Direction::NW), c(2, -2));
    }

    #[test]
    fn direction_between_examples() {
        assert_eq!(direction_between(c(0, 0), c(1, 0)), Some(Direction::E));
        assert_eq!(direction_between(c(0, 1), c(0, 0)), Some(Direction::NW));
        assert_eq!(direction_between(c(0, 0), c(2, 0)), None);
    }

    #[test]
    fn common_neighbor_examples() {
        let cn = common_neighbors(c(0, 0), c(1, 0)).unwrap();
        assert_eq!(
            common_by_intersection(c(0, 0), c(1, 0)),
            BTreeSet::from([c(0, 1), c(1, -1)])
        );
        assert!(cn.contains(c(0, 1)) && cn.contains(c(1, -1)));
        assert_eq!(cn.lower(), c(0, 1));

        let cn = common_neighbors(c(0, 0), c(0, 1)).unwrap();
        assert_eq!(
            common_by_intersection(c(0, 0), c(0, 1)),
            BTreeSet::from([c(1, 0), c(-1, 1)])
        );
        assert_eq!(cn.lower(), c(-1, 1));
        assert_eq!(cn.higher(), c(1, 0));

        let cn = common_neighbors(c(0, 0), c(-1, 1)).unwrap();
        assert_eq!(
            common_by_intersection(c(0, 0), c(-1, 1)),
            BTreeSet::from([c(-1, 0), c(0, 1)])
        );
        assert_eq!(cn.higher(), c(-1, 0));
    }

    #[test]
    fn common_neighbors_rejects_non_adjacent() {
        assert_eq!(
            common_neighbors(c(0, 0), c(2, 0)),
            Err(NotAdjacent(c(0, 0), c(2, 0)))
        );
    }

    #[test]
    fn direction_classes() {
        let lower: Vec<_> = Direction::ALL.iter().filter(|d| d.is_lower()).collect();
        let upper: Vec<_> = Direction::ALL.iter().filter(|d| d.is_upper()).collect();
        let horiz: Vec<_> = Direction::ALL.iter().filter(|d| d.is_horizontal()).collect();
        assert_eq!(lower, [&Direction::SE, &Direction::SW]);
        assert_eq!(upper, [&Direction::NW, &Direction::NE]);
        assert_eq!(horiz, [&Direction::E, &Direction::W]);
        for d in Direction::ALL {
            assert_eq!(d.axis(), d.opposite().axis());
            assert!(d.offset().r > 0 || !d.is_lower());
        }
    }

    fn coord() -> impl Strategy<Value = NodeCoord> {
        (-1000i64..1000, -1000i64..1000).prop_map(|(q, r)| c(q, r))
    }

    proptest! {
        #[test]
        fn neighbors_form_six_cycle(a in coord()) {
            let ns: Vec<_> = a.neighbors().collect();
            let distinct: BTreeSet<_> = ns.iter().copied().collect();
            prop_assert_eq!(distinct.len(), 6);
            for d in Direction::ALL {
                let n = a.neighbor(d);
                prop_assert!(n.is_adjacent(a));
                prop_assert_eq!(n.neighbor(d.opposite()), a);
                prop_assert!(n.is_adjacent(a.neighbor(d.next())));
            }
        }

        #[test]
        fn common_neighbors_symmetric(a in coord(), d in 0u8..6) {
            let b = a.neighbor(Direction::new(d).unwrap());
            let ab = common_neighbors(a, b).unwrap();
            let ba = common_neighbors(b, a).unwrap();
            let set = |cn: CommonNeighbors| BTreeSet::from([cn.0, cn.1]);
            prop_assert_eq!(set(ab), set(ba));
            prop_assert_eq!(set(ab), common_by_intersection(a, b));
            prop_assert_eq!(ab.lower(), ba.lower());
            for n in [ab.0, ab.1] {
                prop_assert!(n.is_adjacent(a) && n.is_adjacent(b));
            }
        }

        #[test]
        fn translation_equivariance(a in coord(), t in coord(), d in 0u8..6) {
            let d = Direction::new(d).unwrap();
            prop_assert_eq!(neighbor(a + t, d), neighbor(a, d) + t);
        }
    }
}
