//! Splittable deterministic randomness.
//!
//! Every stochastic routine in the crate takes a single 64-bit seed and
//! derives child seeds through a SplitMix64 mix of (seed, role, index).
//! Results are therefore reproducible regardless of iteration order or
//! thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed, a role tag and an index.
pub fn child(seed: u64, role: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(role.wrapping_add(0xa076_1d64_78bd_642f)) ^ splitmix64(index))
}

/// Deterministic RNG for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
