//! Seeded randomness with per-role domain separation.
//!
//! Every protocol role draws from its own ChaCha20 stream, keyed by
//! `SHA-256(seed || role)`, so adding draws to one role never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Coins = ChaCha20Rng;

/// Derives the stream for `role` from a 64-bit session seed.
pub fn coins(seed: u64, role: &str) -> Coins {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((role.len() as u64).to_le_bytes());
    h.update(role.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha20Rng::from_seed(key)
}

/// Derives a child seed, for handing a sub-session its own seed material.
pub fn subseed(seed: u64, role: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(b"subseed:");
    h.update(role.as_bytes());
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}
