//! Deterministic random numbers.
//!
//! Every stochastic routine in the crate draws from [`HerdRng`], which is
//! xoshiro256++ seeded through SplitMix64 (the reference `seed_from_u64`
//! expansion). Uniform doubles take the top 53 bits of each 64-bit output,
//! so a stream is reproducible on any platform and by any other
//! implementation of the same two generators.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct HerdRng {
    inner: Xoshiro256PlusPlus,
}

impl HerdRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` under a base seed.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Self::new(derive_seed(seed, stream))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Inverse-CDF draw from `pmf`, returning a 1-based level.
    ///
    /// Walks the cumulative sum and returns the first level whose cumulative
    /// mass exceeds the uniform draw. If rounding leaves the draw above the
    /// final cumulative sum, the highest level with positive mass is returned.
    pub fn categorical(&mut self, pmf: &[f64]) -> usize {
        sample_inverse_cdf(pmf, self.uniform())
    }

    /// A point drawn uniformly from the probability simplex of dimension `m`
    /// (symmetric Dirichlet with unit concentration, via normalized
    /// exponential variates).
    pub fn simplex_point(&mut self, m: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..m).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
        } else {
            v.iter_mut().for_each(|x| *x = 1.0 / m as f64);
        }
        v
    }
}

/// Inverse-CDF lookup for a uniform `u` in `[0, 1)`.
pub fn sample_inverse_cdf(pmf: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (idx, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return idx + 1;
        }
    }
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(pmf.len() - 1) + 1
}

/// SplitMix64 finalizer over `seed + stream * golden`; gives well separated
/// seeds for per-round or per-item streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
