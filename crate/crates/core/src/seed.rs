//! Deterministic seed derivation.
//!
//! Every source of randomness in the crate is a ChaCha8 stream keyed by a
//! root seed plus a path of indices (replicate index, component index, ...).
//! The derivation is a SHA-256 hash of the root and the path, so streams for
//! different paths are independent for all practical purposes and the
//! mapping is stable across versions.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a 32-byte RNG key from a root seed and a derivation path.
pub fn derive_key(root: u64, path: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"geocume-seed-v1");
    hasher.update(root.to_le_bytes());
    for part in path {
        hasher.update(part.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Builds the RNG stream for `(root, path)`.
pub fn rng(root: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(root, path))
}

/// Derives a child seed, for handing a whole subtree of streams to a
/// component (e.g. one replicate).
pub fn child_seed(root: u64, path: &[u64]) -> u64 {
    let key = derive_key(root, path);
    u64::from_le_bytes(key[..8].try_into().unwrap())
}
