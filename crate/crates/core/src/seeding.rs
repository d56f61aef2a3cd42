//! Seed derivation and the random stream type used across the crate.
//!
//! Every stochastic component receives its own stream, derived from a master seed,
//! an index and a component name, so that streams never alias each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The random source used everywhere in the crate.
pub type Stream = ChaCha8Rng;

/// Derives an independent 64-bit seed from `(base, index, component)`.
pub fn derive_seed(base: u64, index: u64, component: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(index.to_le_bytes());
    hasher.update(component.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Opens the stream for `(base, index, component)`.
pub fn stream(base: u64, index: u64, component: &str) -> Stream {
    Stream::seed_from_u64(derive_seed(base, index, component))
}
