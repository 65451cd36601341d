//! Seeded randomness. Every stochastic routine takes an explicit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distr::StandardUniform;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a batch driven by `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform on `[0, 1)`.
pub fn uniform(rng: &mut Rng) -> f64 {
    StandardUniform.sample(rng)
}
