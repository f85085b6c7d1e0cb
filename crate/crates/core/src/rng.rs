//! Seeded generators.
//!
//! All sampling uses ChaCha20 seeded through `seed_from_u64`. Training draws
//! come from stream 0 and validation draws from stream 1 of the same seed, so
//! a fresh Monte Carlo sample never overlaps the training sample.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const TRAINING_STREAM: u64 = 0;
pub const VALIDATION_STREAM: u64 = 1;

pub fn seeded(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn training_rng(seed: u64) -> ChaCha20Rng {
    seeded(seed, TRAINING_STREAM)
}

pub fn validation_rng(seed: u64) -> ChaCha20Rng {
    seeded(seed, VALIDATION_STREAM)
}
