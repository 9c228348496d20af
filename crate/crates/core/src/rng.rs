//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream derived from an
//! explicit seed plus a stream key, so restarts, folds and augmentation
//! replicates can run in any order (or in parallel) with identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Stream `index` of the generator family seeded by `seed`.
pub fn indexed_stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream keyed by a string label and an index, e.g. (image label, replicate).
pub fn keyed_stream(seed: u64, key: &str, index: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    hasher.update(key.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}
