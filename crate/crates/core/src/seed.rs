//! Stable seed derivation.
//!
//! Every random draw in the crate is made from a ChaCha stream seeded by a
//! digest of (global seed, stage label, record id), so results depend only
//! on the inputs and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub fn rng_for(seed: u64, parts: &[&str]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, parts))
}

/// Hex SHA-256 over a sequence of strings, each length-prefixed.
pub fn digest_strs<S: AsRef<str>>(items: &[S]) -> String {
    let mut h = Sha256::new();
    for s in items {
        let s = s.as_ref();
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
