//! Seed derivation. Every random stream is a function of (seed, label, index),
//! so results never depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a phase label (FNV-1a).
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn mix(seed: u64, a: u64, b: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ a) ^ b)
}

/// Stream for a non-vertex purpose (generators, samplers) keyed by a tag.
pub fn seeded(seed: u64, tag: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(mix(seed, tag, u64::MAX))
}

/// Private stream of vertex `v` within phase `label`.
pub fn vertex_stream(seed: u64, v: usize, label: &str) -> Stream {
    ChaCha8Rng::seed_from_u64(mix(seed, v as u64, label_hash(label)))
}
