//! Seed derivation.
//!
//! A run seed is the SplitMix64 finalizer applied to the first eight bytes
//! (little-endian) of
//! `SHA-256("timefair-seed-v1" || master || len(alg) || alg || len(inst) || inst || rep || run)`
//! where integers are little-endian `u64` and strings are UTF-8. Sub-seeds
//! for restarts inside an algorithm use [`split_seed`].

use sha2::{Digest, Sha256};

/// Identifier written to manifests so third parties can replay seeds.
pub const SEED_SCHEME: &str = "sha256-splitmix64-v1";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(
    master_seed: u64,
    algorithm_id: &str,
    instance_id: &str,
    repetition: u32,
    run_index: u32,
) -> u64 {
    let mut h = Sha256::new();
    h.update(b"timefair-seed-v1");
    h.update(master_seed.to_le_bytes());
    h.update((algorithm_id.len() as u64).to_le_bytes());
    h.update(algorithm_id.as_bytes());
    h.update((instance_id.len() as u64).to_le_bytes());
    h.update(instance_id.as_bytes());
    h.update(u64::from(repetition).to_le_bytes());
    h.update(u64::from(run_index).to_le_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    splitmix64(u64::from_le_bytes(word))
}

/// Independent child seed number `index` of `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA)))
}
