//! Seeded random streams.
//!
//! Every random decision in the crate draws from a [`SplitMix64`] generator
//! seeded through [`stream`], so a `(seed, purpose)` pair always yields the
//! same sequence on every platform.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

/// Seed used when neither a flag nor `IKF_SEED` provides one.
pub const DEFAULT_SEED: u64 = 42;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed for `purpose` from a base seed.
pub fn derive(seed: u64, purpose: u64) -> u64 {
    mix64(seed ^ mix64(purpose.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed for repeat `r` of an experiment started with `seed`.
pub fn repeat_seed(seed: u64, r: u64) -> u64 {
    seed ^ r
}

pub fn stream(seed: u64, purpose: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(derive(seed, purpose))
}

/// Stream purposes. Values are part of the reproducibility contract.
pub(crate) mod purpose {
    pub const FOLDS: u64 = 1;
    pub const ASSIGNMENT: u64 = 2;
    /// Subfold split of fold `i` uses `SUBFOLDS + i`.
    pub const SUBFOLDS: u64 = 1 << 32;
    pub const DATA: u64 = 3;
    pub const HOLDOUT: u64 = 4;
    /// Monte-Carlo repetition `r` uses `REPETITIONS + r`.
    pub const REPETITIONS: u64 = 2 << 32;
}
