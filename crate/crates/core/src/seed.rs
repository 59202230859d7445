//! Seed derivation.
//!
//! Every stochastic component draws from a [`ChaCha8Rng`] seeded by a `u64`.
//! Independent streams (one per episode, pose, candidate, ...) are derived from
//! a master seed with a SplitMix64 finalizer so that serial and concurrent
//! execution consume identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags keep derived seeds for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Episode = 1,
    Pose = 2,
    Cma = 3,
    Policy = 4,
    Shuffle = 5,
    Init = 6,
    Eval = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of item `index` in `stream` under `master`.
pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(master ^ (stream as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(a ^ splitmix64(index))
}

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
