//! Seed derivation and the deterministic RNG used across the crate.
//!
//! Every randomized stage takes an explicit 64-bit seed; per-item streams are
//! derived with SplitMix64 so corpora and training runs are reproducible and
//! independent of execution order.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// SplitMix64 step (Steele, Lea & Flood). Used as a mixing function, not as
/// a stream generator.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for item `index` of a stage seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0x51ed_270b)))
}

/// Derives a stage seed from a master seed and a stage label, so pipeline
/// stages draw from disjoint streams.
pub fn derive_stage_seed(master: u64, label: &str) -> u64 {
    // FNV-1a over the label bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    derive_seed(master, h)
}

/// The crate-wide deterministic RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
