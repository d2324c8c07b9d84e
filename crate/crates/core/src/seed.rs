//! Stable seed derivation.
//!
//! Every random stream in the pipeline is keyed by the global seed plus a
//! label (for example a sampler name and an anchor AUI). Keys are hashed with
//! SHA-256 so derived seeds do not depend on the standard library's hasher,
//! iteration order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive(seed: u64, parts: &[&[u8]]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

/// A ChaCha8 stream keyed by `seed` and the given labels.
pub fn rng_for(seed: u64, parts: &[&[u8]]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive(seed, parts))
}
