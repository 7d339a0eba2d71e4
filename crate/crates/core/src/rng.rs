//! Deterministic random number generation.
//!
//! Every stochastic step in the crate draws from a [`ChaCha8Rng`] seeded
//! either directly or through [`derive_seed`], so a run is reproducible from
//! a single master seed regardless of platform.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Creates the RNG for a master seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a master seed and a label.
///
/// Uses the FNV-1a hash of the label folded into a SplitMix64 step so that
/// distinct labels give unrelated streams while staying stable across runs.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
