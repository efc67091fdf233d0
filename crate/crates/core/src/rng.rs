//! Deterministic RNG streams. Every stochastic step derives its own stream
//! from a seed plus a label, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Hashes a label and a list of integers into a 64-bit seed.
pub fn derive_seed(label: &str, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(label: &str, parts: &[u64]) -> Stream {
    stream(derive_seed(label, parts))
}
