//! Seed derivation.
//!
//! Every trajectory draws from its own ChaCha stream keyed by
//! `(seed, length, ordinal)`, where `ordinal` counts earlier trajectories of
//! the same length in the run. Changing how many trajectories of one length
//! are collected never shifts the randomness of any other length.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrajRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for sub-experiment `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

pub fn trajectory_rng(seed: u64, length: usize, ordinal: u64) -> TrajRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, length as u64));
    rng.set_stream(ordinal);
    rng
}

pub fn seeded(seed: u64) -> TrajRng {
    ChaCha8Rng::seed_from_u64(seed)
}
