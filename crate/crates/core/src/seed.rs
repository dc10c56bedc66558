//! Named seed derivation.
//!
//! Every random stream in the crate is derived from one root seed through a
//! chain of labels (`stage`, `subject`, `fold`, ...), so any sub-computation
//! can be rerun in isolation and still draw the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Derives a child seed from `parent` and a textual label.
pub fn derive(parent: u64, label: &str) -> u64 {
    splitmix64(parent ^ splitmix64(fnv1a(label.as_bytes())))
}

/// Derives a child seed from `parent` and an index (fold number, tree number, ...).
pub fn derive_index(parent: u64, index: u64) -> u64 {
    splitmix64(parent.wrapping_add(splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F))))
}

/// Seeded generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
