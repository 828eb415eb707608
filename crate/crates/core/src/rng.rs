//! Deterministic counter-based random numbers for photon-count sampling.
//!
//! Reproducibility under parallel execution comes from addressing, not
//! serialization: every sampled quantity draws from its own substream keyed by
//! `(seed, scan index, point index)`, so results are identical for any
//! evaluation order or worker count. The generator is SplitMix64; not
//! cryptographic, but statistically solid for Monte Carlo use.

#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream whose initial state is a hash of a seed and an index
/// path. Cloning is cheap; streams with different paths are independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: mix64(seed ^ GOLDEN_GAMMA),
        }
    }

    /// Derive the substream for an index path such as `[scan, point]`.
    pub fn substream(seed: u64, path: &[u64]) -> Self {
        let mut state = mix64(seed ^ GOLDEN_GAMMA);
        for &idx in path {
            state = mix64(state ^ idx.wrapping_add(GOLDEN_GAMMA));
        }
        Self { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }
}

/// Poisson-distributed count with the given mean. Knuth's product method for
/// small means, Hörmann's PTRS transformed rejection above 10, and a Gaussian
/// tail approximation above 10¹² where the skew is far below double precision
/// anyway. Consumes a variable number of draws, which is fine because each
/// sampled point owns its substream.
pub fn sample_poisson(rng: &mut CounterRng, mean: f64) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite());
    if mean <= 0.0 {
        return 0;
    }
    if mean < 10.0 {
        let limit = (-mean).exp();
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= rng.next_f64();
            if p <= limit {
                return k;
            }
            k += 1;
        }
    }
    if mean > 1e12 {
        // Box-Muller normal approximation; relative skew < 1e-6 here
        let u1 = rng.next_f64();
        let u2 = rng.next_f64();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos();
        let value = mean + mean.sqrt() * z;
        return if value < 0.0 { 0 } else { value as u64 };
    }
    poisson_ptrs(rng, mean)
}

fn poisson_ptrs(rng: &mut CounterRng, mean: f64) -> u64 {
    let log_mean = mean.ln();
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.next_f64() - 0.5;
        let v = rng.next_f64();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = k * log_mean - mean - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substream_is_order_independent() {
        let a = CounterRng::substream(42, &[3, 7]);
        let b = CounterRng::substream(42, &[3, 7]);
        assert_eq!(a, b);
        assert_ne!(
            CounterRng::substream(42, &[3, 7]).next_u64(),
            CounterRng::substream(42, &[7, 3]).next_u64()
        );
    }

    #[test]
    fn uniform_stays_in_open_interval() {
        let mut rng = CounterRng::new(1);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn poisson_zero_mean_is_zero() {
        let mut rng = CounterRng::new(5);
        for _ in 0..100 {
            assert_eq!(sample_poisson(&mut rng, 0.0), 0);
        }
    }

    #[test]
    fn poisson_moments_small_mean() {
        let mut sum = 0u64;
        let mut sum_sq = 0u64;
        let n = 40_000u64;
        for i in 0..n {
            let mut rng = CounterRng::substream(7, &[0, i]);
            let k = sample_poisson(&mut rng, 3.5);
            sum += k;
            sum_sq += k * k;
        }
        let mean = sum as f64 / n as f64;
        let var = sum_sq as f64 / n as f64 - mean * mean;
        assert!((mean - 3.5).abs() < 0.05, "mean {mean}");
        assert!((var / mean - 1.0).abs() < 0.05, "var/mean {}", var / mean);
    }

    #[test]
    fn poisson_moments_large_mean() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let n = 20_000u64;
        let mean_target = 1000.0;
        for i in 0..n {
            let mut rng = CounterRng::substream(11, &[1, i]);
            let k = sample_poisson(&mut rng, mean_target) as f64;
            sum += k;
            sum_sq += k * k;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        // 3 sigma on the sample mean of Poisson(1000) over 20k draws
        assert!((mean - mean_target).abs() < 3.0 * (mean_target / n as f64).sqrt());
        assert!(var / mean > 0.95 && var / mean < 1.05, "var/mean {}", var / mean);
    }

    #[test]
    fn fixed_seed_reproduces_sequence() {
        let draws_a: alloc::vec::Vec<u64> = (0..32)
            .map(|i| sample_poisson(&mut CounterRng::substream(9, &[2, i]), 50.0))
            .collect();
        let draws_b: alloc::vec::Vec<u64> = (0..32)
            .map(|i| sample_poisson(&mut CounterRng::substream(9, &[2, i]), 50.0))
            .collect();
        assert_eq!(draws_a, draws_b);
    }
}
