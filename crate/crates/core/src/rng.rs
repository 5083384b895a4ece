//! Seeding conventions.
//!
//! Every stochastic operation in this crate is a pure function of its inputs
//! and a 64-bit seed. The generator is ChaCha12; its name is exported so
//! experiment outputs can record the exact algorithm.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Name of the generator recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Deterministic generator for a given 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derive an independent child seed for ensemble member `index`.
///
/// SplitMix64 finalizer over (base, index); collisions across indices would
/// need ~2^32 children, far beyond any ensemble here.
pub fn child_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x1234_5678_9abc_def1);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = (0..8).map(|_| 0).scan(rng_from_seed(7), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..8).map(|_| 0).scan(rng_from_seed(7), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn child_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| child_seed(42, i)).collect();
        let mut dedup = s.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
    }
}
