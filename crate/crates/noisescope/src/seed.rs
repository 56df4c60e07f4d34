//! Deterministic seed derivation.
//!
//! Every random decision in the crate flows from a single master seed
//! through the mixer below, so reruns with the same seed reproduce every
//! artifact byte for byte. Sub-streams are separated by absorbing a short
//! tag plus whatever indices identify the stream (backend index, pool
//! index, circuit index, epoch, ...).

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// splitmix64 finalizer: a full-avalanche bijection on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix an ordered list of words into one seed.
///
/// Each word is absorbed sponge-style: `acc = splitmix64(acc ^ word)`.
/// Order matters, so `mix64(&[a, b]) != mix64(&[b, a])` in general.
pub fn mix64(words: &[u64]) -> u64 {
    let mut acc = 0u64;
    for &w in words {
        acc = splitmix64(acc ^ w);
    }
    acc
}

/// FNV-1a hash of a string, used to turn stream tags into mixable words.
pub fn tag64(tag: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a sub-seed from a parent seed, a stream tag, and indices.
pub fn derive(parent: u64, tag: &str, indices: &[u64]) -> u64 {
    let mut words = Vec::with_capacity(indices.len() + 2);
    words.push(parent);
    words.push(tag64(tag));
    words.extend_from_slice(indices);
    mix64(&words)
}

/// Seeded ChaCha stream for a derived seed.
pub fn rng(parent: u64, tag: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(parent, tag, indices))
}
