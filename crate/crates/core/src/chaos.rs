//! Chebyshev chaotic spreading sequences.
//!
//! The second-order Chebyshev map `x -> 1 - 2x^2` is iterated in its raw
//! domain `[-1, 1]`, where its invariant density has zero mean and second
//! moment 1/2. Emitted samples are multiplied by `sqrt(2)` so that the chips
//! have unit variance and a bit of `2β` chips carries `E_b ≈ 2β`.

use rand::Rng;
use std::f64::consts::SQRT_2;

/// Raw-domain seeds whose orbits collapse onto a fixed point.
const DEGENERATE_SEEDS: [f64; 5] = [0.0, 1.0, -1.0, 0.5, -0.5];

/// One iteration of the second-order Chebyshev map.
#[inline]
pub fn step(state: f64) -> f64 {
    1.0 - 2.0 * state * state
}

/// Stateful generator of normalized Chebyshev chips.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosStream {
    state: f64,
    scale: f64,
}

impl ChaosStream {
    /// Normalization factor giving unit-variance samples.
    pub const UNIT_VARIANCE_SCALE: f64 = SQRT_2;

    /// Draws a fresh, non-degenerate initial condition from `rng`.
    pub fn seed<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let state = rng.random_range(-1.0..1.0);
            if let Some(stream) = Self::from_state(state) {
                return stream;
            }
        }
    }

    /// Builds a stream from an explicit raw-domain state.
    ///
    /// Returns `None` for states outside the open interval `(-1, 1)` and for
    /// the degenerate seeds `0, ±0.5` whose orbits are eventually fixed.
    pub fn from_state(state: f64) -> Option<Self> {
        if !(state > -1.0 && state < 1.0) || DEGENERATE_SEEDS.contains(&state) {
            return None;
        }
        Some(ChaosStream {
            state,
            scale: Self::UNIT_VARIANCE_SCALE,
        })
    }

    /// Current raw-domain state (the value the next call to
    /// [`next_sample`](Self::next_sample) will iterate from).
    pub fn state(&self) -> f64 {
        self.state
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Advances the map once and returns the normalized sample.
    #[inline]
    pub fn next_sample(&mut self) -> f64 {
        self.state = step(self.state);
        self.scale * self.state
    }

    /// Advances the stream `n` steps, returning the normalized samples.
    pub fn take(&mut self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        self.fill(&mut out, n);
        out
    }

    /// Appends `n` fresh samples to `out`.
    pub fn fill(&mut self, out: &mut Vec<f64>, n: usize) {
        out.extend((0..n).map(|_| self.next_sample()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_examples() {
        assert_eq!(step(0.5), 0.5);
        assert_eq!(step(-1.0), -1.0);
        assert!((step(0.3) - 0.82).abs() < 1e-15);
    }

    #[test]
    fn take_scales_two_iterations() {
        let mut s = ChaosStream::from_state(0.3).unwrap();
        let v = s.take(2);
        let x1 = 1.0 - 2.0 * 0.3 * 0.3;
        let x2 = 1.0 - 2.0 * x1 * x1;
        assert_eq!(v, vec![SQRT_2 * x1, SQRT_2 * x2]);
    }

    #[test]
    fn consecutive_windows_are_disjoint() {
        let mut a = ChaosStream::from_state(0.123).unwrap();
        let mut b = a.clone();
        let w1 = a.take(16);
        let w2 = a.take(16);
        let whole = b.take(32);
        assert_eq!(&whole[..16], &w1[..]);
        assert_eq!(&whole[16..], &w2[..]);
    }

    #[test]
    fn rejects_degenerate_seeds() {
        for s in [0.0, 1.0, -1.0, 0.5, -0.5, 1.5, f64::NAN] {
            assert!(ChaosStream::from_state(s).is_none(), "{s}");
        }
        assert!(ChaosStream::from_state(0.25).is_some());
    }

    #[test]
    fn seeding_is_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = ChaosStream::seed(&mut r1).take(1000);
        let b = ChaosStream::seed(&mut r2).take(1000);
        assert_eq!(a, b);
    }

    #[test]
    fn raw_orbit_stays_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = ChaosStream::seed(&mut rng);
        for _ in 0..1_000_000 {
            let v = s.next_sample();
            assert!(v.abs() <= SQRT_2);
            assert!(s.state().abs() <= 1.0);
        }
    }

    #[test]
    fn frame_energy_near_two_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ChaosStream::seed(&mut rng);
        let beta = 1000;
        let e: f64 = s.take(2 * beta).iter().map(|x| x * x).sum();
        assert!((e / (2 * beta) as f64 - 1.0).abs() < 0.1, "{e}");
    }

    #[test]
    fn long_run_moments_and_whiteness() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut s = ChaosStream::seed(&mut rng);
        let n = 1_000_000;
        let v = s.take(n);
        let mean = v.iter().sum::<f64>() / n as f64;
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((0.99..=1.01).contains(&m2), "second moment {m2}");
        for lag in 1..=20 {
            let c = v.iter().zip(&v[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n - lag) as f64;
            assert!(c.abs() < 0.01, "lag {lag}: {c}");
        }
    }
}
