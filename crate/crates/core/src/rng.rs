//! Seeded randomness.
//!
//! Every stochastic component draws from ChaCha8 seeded with a `u64`.
//! Derived seeds (one per translation, per signal class, per split) come
//! from [`mix_seed`], which runs the SplitMix64 finalizer over the base seed
//! and a stream index so that neighbouring indices give unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed for stream `index` under `base`.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}
