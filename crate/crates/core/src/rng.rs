//! Seeded, portable random number generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere randomness affects an artifact.
pub type Rng = ChaCha8Rng;

/// Recorded in dataset headers so other implementations can reproduce runs.
pub const GENERATOR_NAME: &str = "chacha8-seed_from_u64";

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream derived from `seed`. Distinct `stream` values
/// never overlap.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
