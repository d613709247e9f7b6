//! Closed-form BER, throughput and spectral efficiency of the multiplexed
//! schemes.
//!
//! Per-hop error probabilities follow the Gaussian approximation of the
//! DCSK correlator output,
//!
//! ```text
//! BER(γ) = ½ erfc( [4/γ + 2β/γ²]^(-1/2) ),   γ = (λ₁² + λ₂²) E_b / N₀,
//! ```
//!
//! averaged over the density of `γ` for a two-ray Rayleigh link. The three
//! hop error rates compose into an end-to-end rate because an even number
//! of hop errors cancels out in the bipolar XOR.

mod erfc;
pub mod quadrature;

pub use self::erfc::erfc;

use crate::channel::{Fading, TwoRayLink};
use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::schemes::{slot_and_bandwidth, Scenario, SchemeId};
use quadrature::{integrate_with_breaks, Tolerance};

/// Relative gap between the two mean SNRs below which they are treated as
/// identical.
pub const PDF_SWITCH_GAP: f64 = 1e-9;

/// The SNR integration range extends to this many times the larger mean SNR.
pub const GAMMA_MAX_FACTOR: f64 = 50.0;

/// Mean per-path SNRs of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub gamma_bar_1: f64,
    pub gamma_bar_2: f64,
    pub beta: usize,
}

impl SnrPoint {
    pub fn new(gamma_bar_1: f64, gamma_bar_2: f64, beta: usize) -> Result<Self> {
        let p = SnrPoint {
            gamma_bar_1,
            gamma_bar_2,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `γ̄ᵢ = (E_b/N₀)·E[λᵢ²]` for a link at linear `ebn0`.
    pub fn from_link(link: &TwoRayLink, ebn0: f64, beta: usize) -> Result<Self> {
        Self::new(ebn0 * link.avg_gain_1, ebn0 * link.avg_gain_2, beta)
    }

    fn validate(&self) -> Result<()> {
        let (g1, g2) = (self.gamma_bar_1, self.gamma_bar_2);
        if !(g1 >= 0.0 && g2 >= 0.0 && g1.is_finite() && g2.is_finite()) {
            return Err(Error::Domain(format!(
                "mean SNRs must be finite and non-negative, got ({g1}, {g2})"
            )));
        }
        if g1 == 0.0 && g2 == 0.0 {
            return Err(Error::Domain(
                "at least one mean SNR must be positive".into(),
            ));
        }
        if self.beta == 0 {
            return Err(Error::Domain("beta must be at least 1".into()));
        }
        Ok(())
    }

    fn identical(&self) -> bool {
        let (g1, g2) = (self.gamma_bar_1, self.gamma_bar_2);
        (g1 - g2).abs() <= PDF_SWITCH_GAP * g1.max(g2)
    }
}

/// Bit error rates of the three hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBerTriple {
    /// User A to relay.
    pub ber_1a: f64,
    /// User B to relay.
    pub ber_1b: f64,
    /// Relay to user B.
    pub ber_2b: f64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be a probability, got {p}"
        )))
    }
}

#[inline]
fn instantaneous_unchecked(gamma: f64, beta: f64) -> f64 {
    0.5 * erfc((4.0 / gamma + 2.0 * beta / (gamma * gamma)).powf(-0.5))
}

/// Conditional BER of a DCSK hop at instantaneous SNR `gamma`.
pub fn instantaneous_ber(gamma: f64, beta: usize) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {gamma}")));
    }
    Ok(instantaneous_unchecked(gamma, beta as f64))
}

#[inline]
fn instantaneous_isi_unchecked(gamma_1: f64, gamma_2: f64, beta: f64) -> f64 {
    let gamma = gamma_1 + gamma_2;
    let isi = 8.0 * gamma_1 * gamma_2 / (gamma * gamma * beta);
    0.5 * erfc((isi + 4.0 / gamma + 2.0 * beta / (gamma * gamma)).powf(-0.5))
}

/// Conditional BER keeping the variance `2λ₁²λ₂²E_b` of the cross product
/// between the direct and delayed reference (`γᵢ = λᵢ²E_b/N₀`).
pub fn instantaneous_ber_with_isi(gamma_1: f64, gamma_2: f64, beta: usize) -> Result<f64> {
    if !(gamma_1 >= 0.0 && gamma_2 >= 0.0 && gamma_1 + gamma_2 > 0.0) {
        return Err(Error::Domain(format!(
            "path SNRs must be non-negative and not both zero, got ({gamma_1}, {gamma_2})"
        )));
    }
    Ok(instantaneous_isi_unchecked(gamma_1, gamma_2, beta as f64))
}

fn pdf_unchecked(gamma: f64, g1: f64, g2: f64, identical: bool) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    if identical {
        return gamma / (g1 * g1) * (-gamma / g1).exp();
    }
    let decay = |g: f64| if g > 0.0 { (-gamma / g).exp() } else { 0.0 };
    (decay(g1) - decay(g2)) / (g1 - g2)
}

/// Density of `γ = γ₁ + γ₂` for independent exponential path SNRs.
pub fn snr_pdf(gamma: f64, point: &SnrPoint) -> Result<f64> {
    point.validate()?;
    Ok(pdf_unchecked(
        gamma,
        point.gamma_bar_1,
        point.gamma_bar_2,
        point.identical(),
    ))
}

/// The distinct-SNR density evaluated regardless of the switch policy.
pub fn snr_pdf_distinct(gamma: f64, point: &SnrPoint) -> Result<f64> {
    point.validate()?;
    Ok(pdf_unchecked(
        gamma,
        point.gamma_bar_1,
        point.gamma_bar_2,
        false,
    ))
}

/// The identical-SNR density `γ/γ̄₁²·exp(-γ/γ̄₁)`.
pub fn snr_pdf_identical(gamma: f64, point: &SnrPoint) -> Result<f64> {
    point.validate()?;
    if point.gamma_bar_1 == 0.0 {
        return Err(Error::Domain(
            "identical-branch density needs γ̄₁ > 0".into(),
        ));
    }
    Ok(pdf_unchecked(
        gamma,
        point.gamma_bar_1,
        point.gamma_bar_1,
        true,
    ))
}

/// Panel edges on `[0, upper]` at `0.1, 1, 10, 100` times every mean SNR.
fn breakpoints(means: &[f64], upper: f64) -> Vec<f64> {
    let mut pts = vec![0.0, upper];
    for &g in means.iter().filter(|&&g| g > 0.0) {
        pts.extend(
            [0.1 * g, g, 10.0 * g, 100.0 * g]
                .into_iter()
                .filter(|&p| p < upper),
        );
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Fading-averaged BER of one two-ray Rayleigh hop.
pub fn average_ber(point: &SnrPoint) -> Result<f64> {
    point.validate()?;
    let (g1, g2) = (point.gamma_bar_1, point.gamma_bar_2);
    let identical = point.identical();
    let beta = point.beta as f64;
    let upper = GAMMA_MAX_FACTOR * g1.max(g2);
    let r = integrate_with_breaks(
        |g| instantaneous_unchecked(g, beta) * pdf_unchecked(g, g1, g2, identical),
        &breakpoints(&[g1, g2], upper),
        Tolerance::default(),
    )?;
    Ok(r.value)
}

/// Fading average of [`instantaneous_ber_with_isi`] over independent
/// exponential path SNRs (a two-dimensional integral).
pub fn average_ber_with_isi(point: &SnrPoint) -> Result<f64> {
    point.validate()?;
    let (g1, g2) = (point.gamma_bar_1, point.gamma_bar_2);
    if g1 == 0.0 || g2 == 0.0 {
        // Single path: the cross product vanishes.
        return average_ber(point);
    }
    let beta = point.beta as f64;
    let inner_tol = Tolerance {
        relative: 1e-10,
        ..Tolerance::default()
    };
    let inner_breaks = breakpoints(&[g2], GAMMA_MAX_FACTOR * g2);
    let inner = |x1: f64| -> Result<f64> {
        let r = integrate_with_breaks(
            |x2| instantaneous_isi_unchecked(x1, x2, beta) * (-x2 / g2).exp() / g2,
            &inner_breaks,
            inner_tol,
        )?;
        Ok(r.value * (-x1 / g1).exp() / g1)
    };
    // Integrate the outer variable with errors surfaced from the inner pass.
    let failure = std::cell::RefCell::new(None);
    let r = integrate_with_breaks(
        |x1| match inner(x1) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &breakpoints(&[g1], GAMMA_MAX_FACTOR * g1),
        Tolerance::default(),
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// BER of a single unit-gain AWGN hop at linear `ebn0`.
pub fn awgn_ber(ebn0: f64, beta: usize) -> Result<f64> {
    if !(ebn0 > 0.0) {
        return Err(Error::Domain(format!("Eb/N0 must be positive, got {ebn0}")));
    }
    instantaneous_ber(ebn0, beta)
}

/// Error probability of a bit decoded from two independent error sources.
pub fn relay_ber(ber_a: f64, ber_b: f64) -> Result<f64> {
    check_probability("ber_a", ber_a)?;
    check_probability("ber_b", ber_b)?;
    Ok(ber_a * (1.0 - ber_b) + ber_b * (1.0 - ber_a))
}

/// End-to-end BER of the relay chain, expanded form.
pub fn end_to_end_ber(t: &LinkBerTriple) -> Result<f64> {
    let (a, b, c) = (t.ber_1a, t.ber_1b, t.ber_2b);
    check_probability("ber_1a", a)?;
    check_probability("ber_1b", b)?;
    check_probability("ber_2b", c)?;
    Ok(a + b + c - 2.0 * a * b - 2.0 * a * c - 2.0 * b * c + 4.0 * a * b * c)
}

/// Analytical BER of one hop at `ebn0_db`.
///
/// Rayleigh links are averaged over fading; static links are evaluated at
/// their fixed SNR.
pub fn link_ber(link: &TwoRayLink, ebn0_db: f64, beta: usize, include_term_c: bool) -> Result<f64> {
    let ebn0 = db_to_linear(ebn0_db);
    let (g1, g2) = (ebn0 * link.avg_gain_1, ebn0 * link.avg_gain_2);
    match (link.fading, include_term_c) {
        (Fading::Static, false) => instantaneous_ber(g1 + g2, beta),
        (Fading::Static, true) => instantaneous_ber_with_isi(g1, g2, beta),
        (Fading::Rayleigh, false) => average_ber(&SnrPoint::new(g1, g2, beta)?),
        (Fading::Rayleigh, true) => average_ber_with_isi(&SnrPoint::new(g1, g2, beta)?),
    }
}

/// Per-hop and end-to-end analytical BER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBer {
    pub links: LinkBerTriple,
    pub end_to_end: f64,
}

/// Analytical BER of user A's bit at user B for a multiplexed scenario.
pub fn analytic_ber(scenario: &Scenario, include_term_c: bool) -> Result<AnalyticBer> {
    if !scenario.scheme.is_multiplexed() {
        return Err(Error::UnsupportedScheme(scenario.scheme));
    }
    let hop = |l: &TwoRayLink| link_ber(l, scenario.ebn0_db, scenario.beta, include_term_c);
    let links = LinkBerTriple {
        ber_1a: hop(&scenario.hop1_a)?,
        ber_1b: hop(&scenario.hop1_b)?,
        ber_2b: hop(&scenario.hop2_b)?,
    };
    Ok(AnalyticBer {
        links,
        end_to_end: end_to_end_ber(&links)?,
    })
}

/// Which user enjoys an interference-free (AWGN-only) channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// A's uplink is AWGN; B's uplink and downlink fade.
    UserALow,
    /// B's uplink and downlink are AWGN; A's uplink fades.
    UserBLow,
    /// Every hop is AWGN.
    AllAwgn,
}

/// End-to-end BER when one side of the network sees only AWGN.
pub fn special_case_ber(
    case: SpecialCase,
    ebn0_db: f64,
    beta: usize,
    hop1_a: &TwoRayLink,
    hop1_b: &TwoRayLink,
    hop2_b: &TwoRayLink,
) -> Result<AnalyticBer> {
    let awgn = awgn_ber(db_to_linear(ebn0_db), beta)?;
    let fading =
        |l: &TwoRayLink| average_ber(&SnrPoint::from_link(l, db_to_linear(ebn0_db), beta)?);
    let links = match case {
        SpecialCase::UserALow => LinkBerTriple {
            ber_1a: awgn,
            ber_1b: fading(hop1_b)?,
            ber_2b: fading(hop2_b)?,
        },
        SpecialCase::UserBLow => LinkBerTriple {
            ber_1a: fading(hop1_a)?,
            ber_1b: awgn,
            ber_2b: awgn,
        },
        SpecialCase::AllAwgn => LinkBerTriple {
            ber_1a: awgn,
            ber_1b: awgn,
            ber_2b: awgn,
        },
    };
    Ok(AnalyticBer {
        links,
        end_to_end: end_to_end_ber(&links)?,
    })
}

/// Correct bits per unit time for binary signalling.
pub fn throughput(ber: f64, t_n: f64) -> Result<f64> {
    check_probability("ber", ber)?;
    if !(t_n > 0.0) {
        return Err(Error::Domain(format!(
            "exchange time must be positive, got {t_n}"
        )));
    }
    const BITS_PER_SYMBOL: f64 = 1.0; // log2(M), M = 2
    Ok(BITS_PER_SYMBOL * (1.0 - ber) / t_n)
}

/// Throughput of `scheme` with `T_c = 1`.
pub fn scheme_throughput(scheme: SchemeId, ber: f64, beta: usize) -> Result<f64> {
    throughput(ber, slot_and_bandwidth(scheme, beta, 1.0).t_n)
}

/// Link spectral efficiency (throughput per unit bandwidth) of the
/// multiplexed schemes, `T_c = 1`.
pub fn spectral_efficiency(scheme: SchemeId, ber: f64, beta: usize) -> Result<f64> {
    check_probability("ber", ber)?;
    let b = beta as f64;
    match scheme {
        SchemeId::FreqMux3 => Ok((1.0 - ber) / (8.0 * b)),
        SchemeId::TimeMux2 => Ok((1.0 - ber) / (6.0 * b)),
        other => Err(Error::UnsupportedScheme(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instantaneous_examples() {
        // 4/20 + 100/400 = 0.45
        let v = instantaneous_ber(20.0, 50).unwrap();
        assert!((v - 0.017507490509831255).abs() < 1e-15, "{v}");
        assert!(instantaneous_ber(1e12, 50).unwrap() < 1e-300);
        assert!((instantaneous_ber(1e-9, 50).unwrap() - 0.5).abs() < 1e-5);
        assert!(instantaneous_ber(0.0, 50).is_err());
        assert!(instantaneous_ber(-1.0, 50).is_err());
    }

    #[test]
    fn instantaneous_is_strictly_decreasing() {
        let mut prev = 0.5;
        for i in 1..400 {
            let g = 10f64.powf(-2.0 + i as f64 * 0.01);
            let v = instantaneous_ber(g, 25).unwrap();
            assert!(v < prev, "γ = {g}");
            prev = v;
        }
    }

    #[test]
    fn awgn_examples() {
        let v = awgn_ber(100.0, 100).unwrap();
        assert!((v - 3.882018268965339e-9).abs() < 1e-20, "{v:e}");
        for (e, b) in [(3.0, 10), (17.5, 25), (400.0, 150)] {
            assert_eq!(awgn_ber(e, b).unwrap(), instantaneous_ber(e, b).unwrap());
        }
        assert!(awgn_ber(1e9, 50).unwrap() < 1e-300);
    }

    #[test]
    fn pdf_examples() {
        let p = SnrPoint::new(2.0, 1.0, 25).unwrap();
        assert!((snr_pdf(1.0, &p).unwrap() - 0.2386512185411911).abs() < 1e-15);
        assert_eq!(snr_pdf(-1.0, &p).unwrap(), 0.0);
        assert!(SnrPoint::new(0.0, 0.0, 25).is_err());
    }

    #[test]
    fn pdfs_integrate_to_one() {
        let tol = Tolerance {
            relative: 1e-12,
            ..Tolerance::default()
        };
        for (g1, g2) in [
            (2.0, 1.0),
            (0.7, 0.89),
            (5.0, 5.0),
            (31.6, 0.0),
            (1e-3, 7.0),
        ] {
            let p = SnrPoint::new(g1, g2, 25).unwrap();
            let upper = GAMMA_MAX_FACTOR * g1.max(g2);
            let pts = breakpoints(&[g1, g2], upper);
            let mass = integrate_with_breaks(|g| snr_pdf(g, &p).unwrap(), &pts, tol)
                .unwrap()
                .value;
            assert!((mass - 1.0).abs() < 1e-8, "({g1}, {g2}): {mass}");
        }
        let p = SnrPoint::new(3.0, 3.0, 25).unwrap();
        let mass = integrate_with_breaks(|g| snr_pdf_identical(g, &p).unwrap(), &[0.0, 150.0], tol)
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn identical_mode_at_mean() {
        let p = SnrPoint::new(4.0, 4.0, 25).unwrap();
        let f = |g| snr_pdf(g, &p).unwrap();
        let h = 1e-4;
        assert!(f(4.0) > f(4.0 - h) && f(4.0) > f(4.0 + h));
    }

    #[test]
    fn pdf_branches_meet() {
        for g in [0.1, 1.0, 3.0, 10.0] {
            let exact = SnrPoint::new(3.0, 3.0, 25).unwrap();
            let near = SnrPoint::new(3.0, 3.0 * (1.0 + 1e-6), 25).unwrap();
            let a = snr_pdf_identical(g, &exact).unwrap();
            let b = snr_pdf_distinct(g, &near).unwrap();
            assert!((a - b).abs() <= 1e-5 * a, "γ={g}: {a} vs {b}");
        }
        // Inside the switch gap the identical branch is used.
        let p = SnrPoint::new(3.0, 3.0 * (1.0 + 1e-12), 25).unwrap();
        assert_eq!(
            snr_pdf(1.0, &p).unwrap(),
            snr_pdf_identical(1.0, &p).unwrap()
        );
    }

    #[test]
    fn average_ber_limits_and_monotonicity() {
        let p = SnrPoint::new(1e-9, 1e-9, 25).unwrap();
        assert!((average_ber(&p).unwrap() - 0.5).abs() < 1e-4);
        let link = TwoRayLink::rayleigh(0.7, 0.89, 3);
        let mut prev = 0.5;
        for db in 0..=40 {
            let v = link_ber(&link, db as f64, 25, false).unwrap();
            assert!(v < prev, "{db} dB");
            prev = v;
        }
    }

    #[test]
    fn average_ber_matches_fading_draws() {
        // Independent check: sample the path powers directly.
        let (g1, g2, beta) = (0.7 * 31.6227766, 0.89 * 31.6227766, 25);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 2_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let e1: f64 = -(1.0 - rng.random::<f64>()).ln();
            let e2: f64 = -(1.0 - rng.random::<f64>()).ln();
            acc += instantaneous_ber(g1 * e1 + g2 * e2, beta).unwrap();
        }
        let mc = acc / n as f64;
        let quad = average_ber(&SnrPoint::new(g1, g2, beta).unwrap()).unwrap();
        assert!((quad / mc - 1.0).abs() < 0.01, "{quad} vs {mc}");
    }

    #[test]
    fn isi_term_only_increases_ber() {
        let p = SnrPoint::new(20.0, 15.0, 25).unwrap();
        let plain = average_ber(&p).unwrap();
        let full = average_ber_with_isi(&p).unwrap();
        assert!(full > plain);
        let single = SnrPoint::new(20.0, 0.0, 25).unwrap();
        assert_eq!(
            average_ber_with_isi(&single).unwrap(),
            average_ber(&single).unwrap()
        );
        assert_eq!(
            instantaneous_ber_with_isi(7.0, 0.0, 25).unwrap(),
            instantaneous_ber(7.0, 25).unwrap()
        );
    }

    #[test]
    fn composition_examples() {
        let t = |a, b, c| {
            end_to_end_ber(&LinkBerTriple {
                ber_1a: a,
                ber_1b: b,
                ber_2b: c,
            })
            .unwrap()
        };
        assert_eq!(t(0.0, 0.0, 0.0), 0.0);
        assert_eq!(t(0.5, 0.5, 0.5), 0.5);
        assert_eq!(t(0.3, 0.0, 0.0), 0.3);
        assert_eq!(relay_ber(0.0, 0.2).unwrap(), 0.2);
        assert_eq!(relay_ber(0.5, 0.5).unwrap(), 0.5);
        assert!((relay_ber(0.1, 0.1).unwrap() - 2.0 * 0.1 * 0.9).abs() < 1e-16);
        assert!(relay_ber(1.5, 0.1).is_err());
        assert!(t(0.0, 0.0, 0.0) == 0.0);
    }

    #[test]
    fn special_cases() {
        let beta = 25;
        let fade = TwoRayLink::rayleigh(0.7, 0.89, 3);
        let all = special_case_ber(SpecialCase::AllAwgn, 12.0, beta, &fade, &fade, &fade).unwrap();
        let p = awgn_ber(db_to_linear(12.0), beta).unwrap();
        let want = end_to_end_ber(&LinkBerTriple {
            ber_1a: p,
            ber_1b: p,
            ber_2b: p,
        })
        .unwrap();
        assert_eq!(all.end_to_end, want);

        // A very strong fading side leaves only the AWGN contribution.
        let strong = TwoRayLink::rayleigh(1e9, 1e9, 3);
        let b_low =
            special_case_ber(SpecialCase::UserBLow, 10.0, beta, &strong, &fade, &fade).unwrap();
        let p = awgn_ber(10.0, beta).unwrap();
        assert!((b_low.end_to_end - relay_ber(p, p).unwrap()).abs() < 1e-12);
        let a_low =
            special_case_ber(SpecialCase::UserALow, 10.0, beta, &fade, &strong, &strong).unwrap();
        assert!((a_low.end_to_end - p).abs() < 1e-12);
    }

    #[test]
    fn throughput_examples() {
        assert!((throughput(0.0, 200.0).unwrap() - 0.005).abs() < 1e-18);
        assert!((throughput(0.0, 300.0).unwrap() - 1.0 / 300.0).abs() < 1e-18);
        assert_eq!(throughput(1.0, 300.0).unwrap(), 0.0);
        assert!(throughput(0.1, 0.0).is_err());
        let s3 = scheme_throughput(SchemeId::FreqMux3, 0.01, 50).unwrap();
        let s2 = scheme_throughput(SchemeId::TimeMux2, 0.01, 50).unwrap();
        assert!((s3 / s2 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn efficiency_examples() {
        assert!((spectral_efficiency(SchemeId::FreqMux3, 0.0, 50).unwrap() - 0.0025).abs() < 1e-18);
        assert!(
            (spectral_efficiency(SchemeId::TimeMux2, 0.0, 50).unwrap() - 1.0 / 300.0).abs() < 1e-18
        );
        assert!(matches!(
            spectral_efficiency(SchemeId::Pnc1, 0.0, 50),
            Err(Error::UnsupportedScheme(SchemeId::Pnc1))
        ));
        for ber in [0.0, 0.013, 0.3] {
            let f = spectral_efficiency(SchemeId::FreqMux3, ber, 25).unwrap();
            let t = spectral_efficiency(SchemeId::TimeMux2, ber, 25).unwrap();
            assert!((f / t - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_requires_multiplexed_scheme() {
        let l = TwoRayLink::rayleigh(0.7, 0.89, 3);
        let sc = Scenario::new(SchemeId::Pnc1, 25, l, l, l);
        assert!(matches!(
            analytic_ber(&sc, false),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    proptest! {
        #[test]
        fn expanded_equals_chained(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            let t = LinkBerTriple { ber_1a: a, ber_1b: b, ber_2b: c };
            let chained = relay_ber(relay_ber(a, b).unwrap(), c).unwrap();
            prop_assert!((end_to_end_ber(&t).unwrap() - chained).abs() < 1e-15);
        }
    }
}
