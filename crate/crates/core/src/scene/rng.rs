//! Reproducible random numbers for scene generation.
//!
//! The stream is ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`. Each
//! real is built from one 64-bit output as `(x >> 11) * 2^-53`, so any
//! implementation of ChaCha8 with the same seeding reproduces scenes bit for
//! bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SceneRng(ChaCha8Rng);

impl SceneRng {
    pub fn new(seed: u64) -> Self {
        SceneRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}
