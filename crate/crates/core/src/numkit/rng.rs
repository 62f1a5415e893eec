use rand_core::{Rng as _, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

/// Seeded pseudo-random stream.
///
/// The generator is xoshiro256** (Blackman & Vigna), seeded from a `u64`
/// through SplitMix64 as in the reference implementation. Uniform variates
/// take the top 53 bits of each output, so the stream of `f64`s is identical
/// on every platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rng {
    seed: u64,
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { seed, inner: Xoshiro256StarStar::seed_from_u64(seed), spare_normal: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform variate in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in 0..n.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal variate by the Box–Muller transform.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// An independent stream derived from this one's seed and a tag.
    pub fn fork(&self, tag: u64) -> Rng {
        Rng::new(self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}
