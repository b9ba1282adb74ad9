//! Seeded generator of arbitrary connected initial configurations.
//!
//! Growth attaches one particle at a time to a random empty node on the
//! frontier, so every intermediate shape is connected. `hole_bias` makes
//! growth prefer nodes with many occupied neighbours (compact blobs) and
//! then carves interior contracted particles out, re-attaching each one on
//! the exterior so the particle count is unchanged.

use std::collections::{BTreeSet, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::configuration::{Body, Configuration};
use crate::grid::NodeCoord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("particle count must be at least 1")]
    NoParticles,
    #[error("{name} must lie in [0, 1], got {value}")]
    Ratio { name: &'static str, value: f64 },
}

struct Blob {
    bodies: Vec<Body>,
    occupied: HashSet<NodeCoord>,
}

impl Blob {
    fn occupied_neighbors(&self, n: NodeCoord) -> usize {
        n.neighbors().filter(|m| self.occupied.contains(m)).count()
    }

    fn frontier(&self) -> BTreeSet<NodeCoord> {
        self.occupied
            .iter()
            .flat_map(|n| n.neighbors())
            .filter(|n| !self.occupied.contains(n))
            .collect()
    }

    fn push(&mut self, body: Body) {
        self.occupied.extend(body.nodes());
        self.bodies.push(body);
    }

    fn to_config(&self) -> Configuration {
        Configuration::from_bodies(self.bodies.iter().copied()).expect("generator keeps nodes disjoint")
    }

    /// Places a particle at `at`, expanding into a random empty neighbour when asked.
    fn attach(&mut self, at: NodeCoord, expanded: bool, rng: &mut ChaCha8Rng) {
        let body = if expanded {
            let free: Vec<_> = at.neighbors().filter(|m| !self.occupied.contains(m)).collect();
            match free.choose(rng) {
                Some(&other) => Body::Expanded(at, other),
                None => Body::Contracted(at),
            }
        } else {
            Body::Contracted(at)
        };
        self.push(body);
    }
}

fn pick_weighted(candidates: &[(NodeCoord, f64)], rng: &mut ChaCha8Rng) -> NodeCoord {
    let total: f64 = candidates.iter().map(|(_, w)| w).sum();
    let mut x = rng.random::<f64>() * total;
    for &(n, w) in candidates {
        if x < w {
            return n;
        }
        x -= w;
    }
    candidates.last().unwrap().0
}

fn check_ratio(name: &'static str, value: f64) -> Result<(), GenerateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(GenerateError::Ratio { name, value })
    }
}

/// Generates a connected configuration of exactly `n` particles.
pub fn generate_random(
    n: usize,
    expanded_fraction: f64,
    hole_bias: f64,
    seed: u64,
) -> Result<Configuration, GenerateError> {
    if n == 0 {
        return Err(GenerateError::NoParticles);
    }
    check_ratio("expanded_fraction", expanded_fraction)?;
    check_ratio("hole_bias", hole_bias)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let expanded_count = (n as f64 * expanded_fraction).round() as usize;
    let mut expand_flags: Vec<bool> = (0..n).map(|i| i < expanded_count).collect();
    expand_flags.shuffle(&mut rng);

    let exponent = 1.0 + 4.0 * hole_bias;
    let mut blob = Blob {
        bodies: Vec::with_capacity(n),
        occupied: HashSet::new(),
    };
    blob.attach(NodeCoord::ORIGIN, expand_flags[0], &mut rng);
    for &expanded in &expand_flags[1..] {
        let candidates: Vec<(NodeCoord, f64)> = blob
            .frontier()
            .into_iter()
            .map(|f| (f, (blob.occupied_neighbors(f) as f64).powf(exponent)))
            .collect();
        let at = pick_weighted(&candidates, &mut rng);
        blob.attach(at, expanded, &mut rng);
    }

    let carves = (hole_bias * n as f64 / 7.0).round() as usize;
    for _ in 0..carves {
        let interior: Vec<usize> = blob
            .bodies
            .iter()
            .enumerate()
            .filter(|(_, b)| match b {
                Body::Contracted(x) => blob.occupied_neighbors(*x) == 6,
                Body::Expanded(..) => false,
            })
            .map(|(i, _)| i)
            .collect();
        let Some(&victim) = interior.choose(&mut rng) else {
            break;
        };
        let Body::Contracted(x) = blob.bodies.remove(victim) else {
            unreachable!()
        };
        blob.occupied.remove(&x);
        let holes: HashSet<NodeCoord> = blob.to_config().holes().into_iter().collect();
        let exterior: Vec<(NodeCoord, f64)> = blob
            .frontier()
            .into_iter()
            .filter(|f| !holes.contains(f))
            .map(|f| (f, (blob.occupied_neighbors(f) as f64).powf(exponent)))
            .collect();
        // The carved particle was contracted, so the expanded count is kept.
        let at = pick_weighted(&exterior, &mut rng);
        blob.push(Body::Contracted(at));
    }

    Ok(blob.to_config())
}
