//! Seed derivation. Every random stream in the pipeline is a ChaCha8
//! generator keyed by a base seed mixed with a stream tag, so independent
//! consumers never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tags))
}

// Stream tags.
pub const TAG_INIT: u64 = 1;
pub const TAG_SHUFFLE: u64 = 2;
pub const TAG_MINING: u64 = 3;
pub const TAG_CLUSTER: u64 = 4;
pub const TAG_RESIZE: u64 = 5;
pub const TAG_SPLIT: u64 = 6;
