//! Proposal kernels over model indicator bitsets.
//!
//! Six kernel types: 1 flips a random number of positions, 2 flips a fixed
//! number, 3 swaps (one in, one out) a random number of times, 4 swaps a
//! fixed number of times, 5 adds one excluded feature, 6 removes one
//! included feature. Degenerate cases return the key unchanged rather than
//! erroring, so every kernel is total.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bits::ModelKey;
use crate::feature::generate::sample_without_replacement;
use crate::rng::Rng;

/// Neighbourhood sizes: `size` for fixed-size kernels (2 and 4), `min..=max`
/// for the random-size kernels (1 and 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighSize {
    pub size: usize,
    pub min: usize,
    pub max: usize,
}

impl NeighSize {
    /// Local-move default used by the MH, annealing, and greedy kernels.
    pub const LOCAL: NeighSize = NeighSize { size: 1, min: 1, max: 2 };

    /// Large-jump sizes scale with the number of searchable features and are
    /// truncated at fixed caps.
    pub fn large_default(q: usize) -> NeighSize {
        let scaled = |f: f64, cap: f64| (((f * q as f64).trunc()).min(cap) as usize).max(1);
        NeighSize {
            size: scaled(0.35, 35.0),
            min: scaled(0.25, 25.0),
            max: scaled(0.45, 45.0),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.min > self.max {
            return Err(crate::Error::Config(format!(
                "neighbourhood min {} exceeds max {}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Apply kernel `kind` (1..=6) to `key`.
pub fn propose(key: &ModelKey, kind: usize, neigh: &NeighSize, rng: &mut Rng) -> ModelKey {
    let q = key.len();
    if q == 0 {
        return key.clone();
    }
    match kind {
        1 => flip_count(key, rng.random_range(neigh.min..=neigh.max), rng),
        2 => flip_count(key, neigh.size, rng),
        3 => swap_repeat(key, rng.random_range(neigh.min..=neigh.max), rng),
        4 => swap_repeat(key, neigh.size, rng),
        5 => add_one(key, rng),
        6 => remove_one(key, rng),
        other => unreachable!("kernel type {other} outside 1..=6"),
    }
}

/// Flip `count` distinct uniformly chosen positions (capped at q).
fn flip_count(key: &ModelKey, count: usize, rng: &mut Rng) -> ModelKey {
    let q = key.len();
    let mut out = key.clone();
    for pos in sample_without_replacement(rng, q, count.min(q)) {
        out.flip(pos);
    }
    out
}

/// Repeat `reps` swaps; each moves one included feature out and one excluded
/// feature in, so model size is preserved. Stops early if either side empties.
fn swap_repeat(key: &ModelKey, reps: usize, rng: &mut Rng) -> ModelKey {
    let mut out = key.clone();
    for _ in 0..reps {
        let ones: Vec<usize> = out.ones().collect();
        if ones.is_empty() || ones.len() == out.len() {
            break;
        }
        let zeros: Vec<usize> = (0..out.len()).filter(|&j| !out.get(j)).collect();
        let drop = ones[rng.random_range(0..ones.len())];
        let add = zeros[rng.random_range(0..zeros.len())];
        out.flip(drop);
        out.flip(add);
    }
    out
}

fn add_one(key: &ModelKey, rng: &mut Rng) -> ModelKey {
    let zeros: Vec<usize> = (0..key.len()).filter(|&j| !key.get(j)).collect();
    let mut out = key.clone();
    if let Some(&pos) = pick(&zeros, rng) {
        out.set(pos, true);
    }
    out
}

fn remove_one(key: &ModelKey, rng: &mut Rng) -> ModelKey {
    let ones: Vec<usize> = key.ones().collect();
    let mut out = key.clone();
    if let Some(&pos) = pick(&ones, rng) {
        out.set(pos, false);
    }
    out
}

fn pick<'a>(items: &'a [usize], rng: &mut Rng) -> Option<&'a usize> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.random_range(0..items.len())])
    }
}
