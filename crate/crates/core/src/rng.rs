//! Deterministic random streams.
//!
//! Every stream is keyed by `(seed, label, index)`. The key is hashed with
//! SHA-256 over `seed_le || len(label)_le || label || index_le` and the digest
//! seeds a ChaCha8 generator. Replicate `i` of a Monte-Carlo loop always reads
//! stream `(seed, label, i)`, so results do not depend on how work is split
//! across threads.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator type used for every derived stream.
pub type StreamRng = ChaCha8Rng;

/// Root seed of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootSeed(pub u64);

impl RootSeed {
    pub fn stream(self, label: &str, index: u64) -> StreamRng {
        derive_stream(self.0, label, index)
    }

    /// A child seed, for nesting whole procedures under one run.
    pub fn child(self, label: &str, index: u64) -> RootSeed {
        let digest = key_digest(self.0, label, index);
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        RootSeed(u64::from_le_bytes(word))
    }
}

fn key_digest(seed: u64, label: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let mut out = [0u8; 32];
    out.copy_from_slice(&hasher.finalize());
    out
}

pub fn derive_stream(seed: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(key_digest(seed, label, index))
}

/// Splits off an independent generator, e.g. for a lazily sampled stream.
pub fn fork<R: RngCore + ?Sized>(rng: &mut R) -> StreamRng {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    ChaCha8Rng::from_seed(seed)
}
