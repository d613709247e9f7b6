//! Two-ray block-fading channel with integer chip delay and AWGN.
//!
//! Each hop carries a direct path and one path delayed by `τ` chips. Path
//! amplitudes are drawn once per frame and held for the whole frame. The
//! delayed path reads from a [`DelayLine`] that persists across frames, so
//! the tail of the previous frame leaks into the head of the next one.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// How path amplitudes are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Independent Rayleigh amplitudes with `E[λ²]` equal to the path gain.
    #[default]
    Rayleigh,
    /// Deterministic amplitudes `λ = sqrt(gain)`; a link with gains `(1, 0)`
    /// is a plain AWGN channel.
    Static,
}

/// Statistical description of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRayLink {
    /// `E[λ₁²]` of the direct path.
    pub avg_gain_1: f64,
    /// `E[λ₂²]` of the delayed path.
    pub avg_gain_2: f64,
    /// Delay of the second path in chips.
    pub delay: usize,
    pub fading: Fading,
}

impl TwoRayLink {
    /// Rayleigh two-ray link.
    pub fn rayleigh(avg_gain_1: f64, avg_gain_2: f64, delay: usize) -> Self {
        TwoRayLink {
            avg_gain_1,
            avg_gain_2,
            delay,
            fading: Fading::Rayleigh,
        }
    }

    /// Unit-gain, single-path, non-fading link.
    pub fn awgn() -> Self {
        TwoRayLink {
            avg_gain_1: 1.0,
            avg_gain_2: 0.0,
            delay: 0,
            fading: Fading::Static,
        }
    }

    /// Checks the link against a spreading half-length `beta`.
    ///
    /// The delay must stay well inside the frame (`4τ < 2β`).
    pub fn validate(&self, beta: usize) -> Result<()> {
        for (field, g) in [
            ("avg_gain_1", self.avg_gain_1),
            ("avg_gain_2", self.avg_gain_2),
        ] {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("path gain must be finite and non-negative, got {g}"),
                });
            }
        }
        if !(self.avg_gain_1 + self.avg_gain_2 > 0.0) {
            return Err(Error::InvalidParameter {
                field: "avg_gain_1",
                reason: "at least one path must carry power".into(),
            });
        }
        if 4 * self.delay >= 2 * beta {
            return Err(Error::InvalidParameter {
                field: "delay",
                reason: format!(
                    "delay {} must be below beta/2 = {}",
                    self.delay,
                    beta as f64 / 2.0
                ),
            });
        }
        Ok(())
    }

    /// Draws the path amplitudes for one frame.
    pub fn draw_realization<R: Rng + ?Sized>(&self, rng: &mut R) -> LinkRealization {
        let amplitude = |gain: f64, rng: &mut R| match self.fading {
            Fading::Static => gain.sqrt(),
            Fading::Rayleigh => {
                let sigma = (gain / 2.0).sqrt();
                let u: f64 = StandardNormal.sample(rng);
                let v: f64 = StandardNormal.sample(rng);
                sigma * u.hypot(v)
            }
        };
        let lambda_1 = amplitude(self.avg_gain_1, rng);
        let lambda_2 = amplitude(self.avg_gain_2, rng);
        LinkRealization {
            lambda_1,
            lambda_2,
            delay: self.delay,
        }
    }
}

/// Path amplitudes of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub delay: usize,
}

impl LinkRealization {
    /// Combined path power `λ₁² + λ₂²`.
    pub fn power(&self) -> f64 {
        self.lambda_1 * self.lambda_1 + self.lambda_2 * self.lambda_2
    }
}

/// Rayleigh density `(λ/σ²)·exp(-λ²/2σ²)`, zero for negative `λ`.
pub fn rayleigh_pdf(lam: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "Rayleigh scale must be positive, got {sigma}"
        )));
    }
    if lam < 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    Ok(lam / s2 * (-lam * lam / (2.0 * s2)).exp())
}

/// Per-hop channel memory: the last `τ` transmitted chips.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    history: Vec<f64>,
}

impl DelayLine {
    /// Empty (all-zero) line for a path delay of `delay` chips.
    pub fn new(delay: usize) -> Self {
        DelayLine {
            history: vec![0.0; delay],
        }
    }

    pub fn delay(&self) -> usize {
        self.history.len()
    }

    /// Passes `chips` through the two-ray channel and adds noise of
    /// variance `n0/2` per chip (`n0 == 0` disables noise).
    ///
    /// `out[k] = λ₁·chips[k] + λ₂·chips[k-τ] + n[k]`, where negative indices
    /// read from the previous traffic stored in the line.
    pub fn transmit<R: Rng + ?Sized>(
        &mut self,
        chips: &[f64],
        realization: &LinkRealization,
        n0: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let tau = realization.delay;
        if tau != self.history.len() {
            return Err(Error::Contract(format!(
                "realization delay {tau} does not match delay line of {}",
                self.history.len()
            )));
        }
        if 4 * tau >= chips.len() && tau > 0 {
            return Err(Error::Contract(format!(
                "delay {tau} too large for a {}-chip frame",
                chips.len()
            )));
        }
        let noise = noise_distribution(n0)?;
        let LinkRealization {
            lambda_1, lambda_2, ..
        } = *realization;

        let mut out = Vec::with_capacity(chips.len());
        for (k, &c) in chips.iter().enumerate() {
            let delayed = if k >= tau {
                chips[k - tau]
            } else {
                self.history[k]
            };
            out.push(lambda_1 * c + lambda_2 * delayed);
        }
        if tau > 0 {
            self.history.copy_from_slice(&chips[chips.len() - tau..]);
        }
        if let Some(noise) = noise {
            for y in &mut out {
                *y += noise.sample(rng);
            }
        }
        Ok(out)
    }
}

/// Gaussian chip noise for spectral level `n0`, or `None` when noiseless.
pub(crate) fn noise_distribution(n0: f64) -> Result<Option<Normal<f64>>> {
    if !(n0 >= 0.0) || n0.is_infinite() {
        return Err(Error::Domain(format!(
            "noise level must be finite and >= 0, got {n0}"
        )));
    }
    if n0 == 0.0 {
        return Ok(None);
    }
    Ok(Some(
        Normal::new(0.0, (n0 / 2.0).sqrt()).expect("positive std-dev"),
    ))
}

/// Adds AWGN of variance `n0/2` in place.
pub fn add_noise<R: Rng + ?Sized>(samples: &mut [f64], n0: f64, rng: &mut R) -> Result<()> {
    if let Some(noise) = noise_distribution(n0)? {
        for y in samples {
            *y += noise.sample(rng);
        }
    }
    Ok(())
}

/// Elementwise sum of two receptions sharing one antenna.
pub fn superpose(rx_a: &[f64], rx_b: &[f64]) -> Result<Vec<f64>> {
    if rx_a.len() != rx_b.len() {
        return Err(Error::Contract(format!(
            "cannot superpose {} and {} chips",
            rx_a.len(),
            rx_b.len()
        )));
    }
    Ok(rx_a.iter().zip(rx_b).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{correlate, Bit, DcskFrame};
    use crate::ChaosStream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Composite Simpson rule on [a, b] with n (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn rayleigh_pdf_properties() {
        assert_eq!(rayleigh_pdf(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(rayleigh_pdf(-1.0, 0.7).unwrap(), 0.0);
        assert!(rayleigh_pdf(1.0, 0.0).is_err());
        for sigma in [0.3, 0.67, 1.0, 2.5] {
            let upper = 40.0 * sigma;
            let mass = simpson(|l| rayleigh_pdf(l, sigma).unwrap(), 0.0, upper, 20_000);
            assert!((mass - 1.0).abs() < 1e-8, "sigma {sigma}: {mass}");
            let m2 = simpson(
                |l| l * l * rayleigh_pdf(l, sigma).unwrap(),
                0.0,
                upper,
                20_000,
            );
            assert!(
                (m2 - 2.0 * sigma * sigma).abs() < 1e-8 * m2,
                "sigma {sigma}: {m2}"
            );
        }
    }

    #[test]
    fn rayleigh_draws_match_average_gain() {
        let link = TwoRayLink::rayleigh(0.9, 0.0, 0);
        let mut r = rng(5);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let real = link.draw_realization(&mut r);
            assert_eq!(real.lambda_2, 0.0);
            assert!(real.lambda_1 >= 0.0);
            acc += real.lambda_1 * real.lambda_1;
        }
        let m = acc / n as f64;
        assert!((0.891..=0.909).contains(&m), "{m}");
    }

    #[test]
    fn draws_are_reproducible() {
        let link = TwoRayLink::rayleigh(0.7, 0.89, 3);
        let a: Vec<_> = {
            let mut r = rng(9);
            (0..100).map(|_| link.draw_realization(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = rng(9);
            (0..100).map(|_| link.draw_realization(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn identity_channel() {
        let real = LinkRealization {
            lambda_1: 1.0,
            lambda_2: 0.0,
            delay: 0,
        };
        let chips = [0.3, -1.2, 0.8, 0.1];
        let out = DelayLine::new(0)
            .transmit(&chips, &real, 0.0, &mut rng(1))
            .unwrap();
        assert_eq!(out, chips);
    }

    #[test]
    fn pure_delay_and_carryover() {
        let real = LinkRealization {
            lambda_1: 0.0,
            lambda_2: 1.0,
            delay: 1,
        };
        let mut line = DelayLine::new(1);
        let first: Vec<f64> = (1..=8).map(f64::from).collect();
        let out = line.transmit(&first, &real, 0.0, &mut rng(1)).unwrap();
        assert_eq!(out, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let second = [10.0; 8];
        let out = line.transmit(&second, &real, 0.0, &mut rng(1)).unwrap();
        assert_eq!(out[0], 8.0);
        assert_eq!(out[1], 10.0);
    }

    #[test]
    fn coherent_two_path_sum() {
        let real = LinkRealization {
            lambda_1: 1.0,
            lambda_2: 1.0,
            delay: 0,
        };
        let chips = [0.5, -0.25, 2.0, 1.0];
        let out = DelayLine::new(0)
            .transmit(&chips, &real, 0.0, &mut rng(1))
            .unwrap();
        assert_eq!(out, [1.0, -0.5, 4.0, 2.0]);
    }

    #[test]
    fn transmit_contract_errors() {
        let real = LinkRealization {
            lambda_1: 1.0,
            lambda_2: 1.0,
            delay: 2,
        };
        let mut line = DelayLine::new(2);
        assert!(matches!(
            line.transmit(&[0.0; 8], &real, 0.0, &mut rng(1)),
            Err(Error::Contract(_))
        ));
        assert!(line.transmit(&[0.0; 9], &real, 0.0, &mut rng(1)).is_ok());
        assert!(DelayLine::new(1)
            .transmit(&[0.0; 9], &real, 0.0, &mut rng(1))
            .is_err());
        assert!(line.transmit(&[0.0; 9], &real, -1.0, &mut rng(1)).is_err());
    }

    #[test]
    fn superpose_examples() {
        let v = [1.0, -2.5, 3.0];
        assert_eq!(superpose(&v, &[0.0; 3]).unwrap(), v);
        assert_eq!(superpose(&v, &[-1.0, 2.5, -3.0]).unwrap(), [0.0; 3]);
        assert_eq!(superpose(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), [4.0, 6.0]);
        assert!(superpose(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn link_validation() {
        assert!(TwoRayLink::rayleigh(0.7, 0.89, 3).validate(25).is_ok());
        assert!(TwoRayLink::rayleigh(0.7, 0.89, 13).validate(25).is_err());
        assert!(TwoRayLink::rayleigh(0.0, 0.0, 0).validate(25).is_err());
        assert!(TwoRayLink::rayleigh(-0.1, 0.5, 0).validate(25).is_err());
        assert!(TwoRayLink::awgn().validate(8).is_ok());
    }

    #[test]
    fn flat_fading_output_is_rayleigh_scaled() {
        // τ = 0 and no second path: a unit chip comes out as λ₁ itself.
        let link = TwoRayLink::rayleigh(0.9, 0.0, 0);
        let mut r = rng(77);
        let mut line = DelayLine::new(0);
        let n = 200_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let real = link.draw_realization(&mut r);
            let out = line
                .transmit(&[1.0, 1.0, 1.0, 1.0], &real, 0.0, &mut r)
                .unwrap();
            assert!(out.iter().all(|&y| y == real.lambda_1));
            m1 += out[0];
            m2 += out[0] * out[0];
        }
        let (m1, m2) = (m1 / n as f64, m2 / n as f64);
        // Rayleigh with 2σ² = 0.9: mean σ·sqrt(π/2).
        let mean = (0.45f64).sqrt() * (std::f64::consts::PI / 2.0).sqrt();
        assert!((m1 - mean).abs() < 0.005, "{m1} vs {mean}");
        assert!((m2 - 0.9).abs() < 0.01, "{m2}");
    }

    #[test]
    fn noise_is_white_across_frames() {
        let real = LinkRealization {
            lambda_1: 1.0,
            lambda_2: 0.0,
            delay: 0,
        };
        let mut line = DelayLine::new(0);
        let mut r = rng(123);
        let n0 = 2.0;
        let mut samples = Vec::with_capacity(1_000_000);
        while samples.len() < 1_000_000 {
            samples.extend(line.transmit(&[0.0; 100], &real, n0, &mut r).unwrap());
        }
        let n = samples.len() as f64;
        let var = samples.iter().map(|x| x * x).sum::<f64>() / n;
        assert!((var - n0 / 2.0).abs() < 0.01, "{var}");
        let c1 = samples.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0) / var;
        assert!(c1.abs() < 0.01, "{c1}");
    }

    #[test]
    fn correlator_snr_matches_configuration() {
        // Frozen amplitudes, bit +1: recover γ from the mean and variance of
        // the decision statistic by inverting 2V/M² = 4/γ + 2β/γ².
        let beta = 50;
        let eb = 2.0 * beta as f64;
        let real = LinkRealization {
            lambda_1: 0.9,
            lambda_2: 0.45,
            delay: 2,
        };
        let ebn0 = 10.0;
        let n0 = eb / ebn0;
        let gamma = real.power() * ebn0;
        let mut r = rng(31);
        let mut stream = ChaosStream::seed(&mut r);
        let mut line = DelayLine::new(2);
        let frames = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..frames {
            let mut reference = Vec::new();
            stream.fill(&mut reference, beta);
            let f = DcskFrame::from_reference(Bit::PLUS, &reference).unwrap();
            let rx = line.transmit(f.chips(), &real, n0, &mut r).unwrap();
            let d = correlate(&rx, beta).unwrap().value();
            s1 += d;
            s2 += d * d;
        }
        let mean = s1 / frames as f64;
        let var = s2 / frames as f64 - mean * mean;
        let q = 2.0 * var / (mean * mean);
        let est = (4.0 + (16.0 + 8.0 * beta as f64 * q).sqrt()) / (2.0 * q);
        assert!(
            (est / gamma - 1.0).abs() < 0.05,
            "estimated {est}, configured {gamma}"
        );
    }
}
