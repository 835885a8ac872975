use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based RNG so independent chains get non-overlapping streams.
pub type Rng = ChaCha8Rng;

/// RNG for run `index` derived from one master seed. Stream 0 is reserved for
/// the orchestrator itself, so run streams start at 1.
pub fn chain_rng(master_seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index + 1);
    rng
}

/// RNG for single-run entry points.
pub fn master_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
