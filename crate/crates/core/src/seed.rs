//! Deterministic seed derivation for trials and time steps.
//!
//! `derive_seed(master, &[trial, step, stream])` folds each component through
//! the SplitMix64 finalizer, so every (trial, step, stream) triple gets an
//! independent generator no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keeping generators for different purposes apart.
pub mod stream {
    pub const INSTANCE: u64 = 1;
    pub const CORRUPT: u64 = 2;
    pub const PERTURB: u64 = 3;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
