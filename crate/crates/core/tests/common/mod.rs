//! Fixtures shared by the integration tests and the acceptance harness.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use amoebot_le::algorithm::{decide, resulting_body};
use amoebot_le::engine::activable;
use amoebot_le::{Body, ConditionId, Configuration, NodeCoord, Pid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(q: i64, r: i64) -> NodeCoord {
    NodeCoord::new(q, r)
}

pub fn config(bodies: &[&[(i64, i64)]]) -> Configuration {
    Configuration::from_bodies(bodies.iter().map(|b| {
        let nodes: Vec<NodeCoord> = b.iter().map(|&(q, r)| c(q, r)).collect();
        Body::from_nodes(&nodes).expect("fixture body")
    }))
    .expect("fixture configuration")
}

/// What activating `pid` must do: fire `condition` and end on `nodes`, or
/// nothing at all.
pub struct Expect {
    pub pid: u32,
    pub outcome: Option<(ConditionId, &'static [(i64, i64)])>,
}

pub struct Scenario {
    pub name: &'static str,
    pub bodies: &'static [&'static [(i64, i64)]],
    pub expect: &'static [Expect],
}

const fn fires(pid: u32, condition: ConditionId, nodes: &'static [(i64, i64)]) -> Expect {
    Expect {
        pid,
        outcome: Some((condition, nodes)),
    }
}

const fn idle(pid: u32) -> Expect {
    Expect { pid, outcome: None }
}

use ConditionId::{C1, C2, E1, E2, E3, E4};

/// Local cases of the final-configuration argument. Expanded particle `p` is
/// pid 0 unless stated; horizontal `p` has t=(0,0), h=(1,0); diagonal `p` has
/// t=(0,0) and h=(0,1) or h=(-1,1). `t_i`/`h_i` name the node in direction i.
pub const SCENARIOS: &[Scenario] = &[
    // Expanded particle that cannot contract without disconnecting.
    Scenario {
        name: "diagonal_se_only_west_of_tail_moves_tail_to_lower_common",
        bodies: &[&[(0, 0), (0, 1)], &[(-1, 0)]],
        expect: &[fires(0, E2, &[(-1, 1), (0, 1)]), idle(1)],
    },
    Scenario {
        name: "diagonal_sw_only_east_of_tail_moves_tail_to_lower_common",
        bodies: &[&[(0, 0), (-1, 1)], &[(1, 0)]],
        expect: &[fires(0, E2, &[(-1, 1), (0, 1)])],
    },
    Scenario {
        name: "horizontal_only_t2_moves_tail_to_lower_common",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 1)]],
        expect: &[fires(0, E2, &[(0, 1), (1, 0)])],
    },
    Scenario {
        name: "horizontal_t4_and_h1_moves_head_below_tail",
        bodies: &[&[(0, 0), (1, 0)], &[(0, -1)], &[(1, 1)]],
        expect: &[fires(0, E3, &[(0, 0), (0, 1)])],
    },
    // Horizontal, t3 empty.
    Scenario {
        name: "horizontal_t3_empty_t2_empty_contracts",
        bodies: &[&[(0, 0), (1, 0)], &[(0, 1)]],
        expect: &[fires(0, E1, &[(1, 0)])],
    },
    Scenario {
        name: "horizontal_t3_empty_t2_occupied_t1_empty_moves_to_t1",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 1)], &[(2, 0)]],
        expect: &[fires(0, E2, &[(0, 1), (1, 0)])],
    },
    Scenario {
        name: "horizontal_t3_empty_t2_t1_occupied_contracts",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 1)], &[(0, 1)]],
        expect: &[fires(0, E1, &[(1, 0)])],
    },
    // Horizontal, t3 occupied.
    Scenario {
        name: "horizontal_t3_t2_t1_occupied_contracts",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(-1, 1)], &[(0, 1)]],
        expect: &[fires(0, E1, &[(1, 0)])],
    },
    Scenario {
        name: "horizontal_t3_t2_occupied_t1_empty_moves_to_t1",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(-1, 1)]],
        expect: &[fires(0, E2, &[(0, 1), (1, 0)])],
    },
    Scenario {
        name: "horizontal_t3_contracted_h2_without_lower_neighbour_expands_right",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(0, 1)]],
        expect: &[fires(2, C2, &[(0, 1), (1, 1)]), fires(0, E3, &[(-1, 1), (0, 0)]), idle(1)],
    },
    Scenario {
        name: "horizontal_t3_contracted_h2_with_one_lower_neighbour_expands_down",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(0, 1)], &[(0, 2)]],
        expect: &[fires(2, C1, &[(0, 1), (-1, 2)])],
    },
    Scenario {
        name: "horizontal_t3_diagonal_h2_moves_tail_above_head",
        bodies: &[&[(-1, 0)], &[(0, 0), (1, 0)], &[(0, 1), (0, 2)]],
        expect: &[fires(2, E4, &[(1, 1), (0, 2)])],
    },
    Scenario {
        name: "horizontal_t3_h1_occupied_h2_empty_moves_head_to_h2",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(1, 1)]],
        expect: &[fires(0, E3, &[(0, 0), (0, 1)])],
    },
    Scenario {
        name: "horizontal_t3_t4_t5_h1_occupied_contracts",
        bodies: &[&[(0, 0), (1, 0)], &[(-1, 0)], &[(0, -1)], &[(1, -1)], &[(1, 1)]],
        expect: &[fires(0, E1, &[(1, 0)])],
    },
    Scenario {
        name: "horizontal_t3_h1_h2_empty_still_moves_head_below_tail",
        bodies: &[&[(-1, 0)], &[(0, 0), (1, 0)]],
        expect: &[fires(1, E3, &[(0, 0), (0, 1)]), idle(0)],
    },
    // Diagonal.
    Scenario {
        name: "diagonal_t3_empty_contracts",
        bodies: &[&[(0, 0), (0, 1)], &[(-1, 1)]],
        expect: &[fires(0, E1, &[(0, 1)])],
    },
    Scenario {
        name: "diagonal_t3_t2_occupied_contracts",
        bodies: &[&[(0, 0), (0, 1)], &[(-1, 0)], &[(-1, 1)]],
        expect: &[fires(0, E1, &[(0, 1)])],
    },
    Scenario {
        name: "diagonal_t5_reaches_head_through_t0",
        bodies: &[&[(0, 0), (0, 1)], &[(1, -1)], &[(1, 0)]],
        expect: &[fires(0, E1, &[(0, 1)])],
    },
    Scenario {
        name: "diagonal_sw_t0_occupied_t1_empty_moves_to_t1",
        bodies: &[&[(0, 0), (-1, 1)], &[(1, 0)], &[(2, 0)]],
        expect: &[fires(0, E2, &[(-1, 1), (0, 1)])],
    },
    // One instance per condition.
    Scenario {
        name: "lone_expanded_contracts",
        bodies: &[&[(0, 0), (0, 1)]],
        expect: &[fires(0, E1, &[(0, 1)])],
    },
    Scenario {
        name: "diagonal_below_horizontal_pair_moves_tail_up",
        bodies: &[&[(0, 0), (1, 0)], &[(0, 1), (0, 2)]],
        expect: &[fires(1, E4, &[(1, 1), (0, 2)]), fires(0, E1, &[(1, 0)])],
    },
    Scenario {
        name: "stacked_pair_expands_into_empty_lower",
        bodies: &[&[(0, 0)], &[(0, 1)]],
        expect: &[fires(0, C1, &[(-1, 1), (0, 0)]), idle(1)],
    },
    Scenario {
        name: "upper_right_neighbour_expands_right",
        bodies: &[&[(0, 0)], &[(1, -1)]],
        expect: &[fires(0, C2, &[(0, 0), (1, 0)]), fires(1, C1, &[(1, -1), (1, 0)])],
    },
    Scenario {
        name: "blocked_right_neighbour_stays",
        bodies: &[&[(0, 0)], &[(1, -1)], &[(1, 0)]],
        expect: &[idle(0)],
    },
];

/// A single configuration in which every condition fires for some particle.
pub const ALL_CONDITIONS: &str = r#"{"particles":[{"nodes":[[0,-1],[0,0]]},{"nodes":[[-1,0],[-1,1]]},{"nodes":[[1,-1]]},{"nodes":[[-2,1],[-2,2]]},{"nodes":[[2,-2]]},{"nodes":[[2,-1],[3,-1]]},{"nodes":[[-1,2]]},{"nodes":[[-3,2]]},{"nodes":[[0,1],[1,1]]},{"nodes":[[0,-2]]},{"nodes":[[2,0],[2,1]]}]}"#;

fn sorted(nodes: &[(i64, i64)]) -> Vec<NodeCoord> {
    let mut v: Vec<NodeCoord> = nodes.iter().map(|&(q, r)| c(q, r)).collect();
    v.sort_by_key(|n| n.row_major());
    v
}

/// Checks a scenario, returning the first mismatch.
pub fn check_scenario(s: &Scenario) -> Result<(), String> {
    let cfg = config(s.bodies);
    if !cfg.is_connected() {
        return Err(format!("{}: fixture is disconnected", s.name));
    }
    for e in s.expect {
        let pid = Pid(e.pid);
        let d = decide(&cfg, pid).map_err(|err| format!("{}: {err}", s.name))?;
        let got = d.map(|d| {
            let body = resulting_body(&cfg, pid, &d).expect("resulting body");
            (d.condition, body.sorted_nodes())
        });
        let want = e.outcome.map(|(cond, nodes)| (cond, sorted(nodes)));
        if got != want {
            return Err(format!("{}: pid {} expected {want:?}, got {got:?}", s.name, e.pid));
        }
    }
    Ok(())
}

pub fn check_all_conditions_instance() -> Result<(), String> {
    let cfg = Configuration::parse(ALL_CONDITIONS).map_err(|e| e.to_string())?;
    let seen: BTreeSet<ConditionId> = activable(&cfg).into_iter().map(|a| a.decision.condition).collect();
    let all = BTreeSet::from([E1, E2, E3, E4, C1, C2]);
    if seen == all {
        Ok(())
    } else {
        Err(format!("all-conditions instance fires only {seen:?}"))
    }
}

/// Empty nodes not reachable from outside the bounding box, by flood fill.
pub fn enclosed_empty_nodes(cfg: &Configuration) -> usize {
    let occupied: BTreeSet<NodeCoord> = cfg.nodes().into_iter().collect();
    if occupied.is_empty() {
        return 0;
    }
    let q0 = occupied.iter().map(|n| n.q).min().unwrap() - 1;
    let q1 = occupied.iter().map(|n| n.q).max().unwrap() + 1;
    let r0 = occupied.iter().map(|n| n.r).min().unwrap() - 1;
    let r1 = occupied.iter().map(|n| n.r).max().unwrap() + 1;
    let inside = |n: NodeCoord| (q0..=q1).contains(&n.q) && (r0..=r1).contains(&n.r);
    let mut outside = BTreeSet::new();
    let start = c(q0, r0);
    let mut queue = VecDeque::from([start]);
    outside.insert(start);
    while let Some(n) = queue.pop_front() {
        for m in n.neighbors() {
            if inside(m) && !occupied.contains(&m) && outside.insert(m) {
                queue.push_back(m);
            }
        }
    }
    let total = ((q1 - q0 + 1) * (r1 - r0 + 1)) as usize;
    total - occupied.len() - outside.len()
}

/// Generator arguments for soak instance `i`.
#[derive(Clone, Copy, Debug)]
pub struct SoakInstance {
    pub index: u64,
    pub n: usize,
    pub expanded_frac: f64,
    pub hole_bias: f64,
    pub seed: u64,
}

pub fn soak_instance(index: u64) -> SoakInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index);
    SoakInstance {
        index,
        n: rng.random_range(1..=30),
        expanded_frac: rng.random_range(0.0..=0.5),
        hole_bias: rng.random_range(0.0..=0.9),
        seed: rng.random(),
    }
}

impl SoakInstance {
    pub fn generate(&self) -> Configuration {
        amoebot_le::generate_random(self.n, self.expanded_frac, self.hole_bias, self.seed).expect("valid arguments")
    }
}
