//! DCSK modulation and correlator detection.
//!
//! A bit `s ∈ {-1, +1}` is sent as `2β` chips: `β` chips of chaotic reference
//! `x` followed by `s·x`. The receiver correlates each received chip of the
//! first half with its counterpart `β` chips later; no channel state is
//! needed because the reference travels through the same channel as the
//! data.

use crate::chaos::ChaosStream;
use crate::error::{Error, Result};
use std::fmt;

/// A bipolar bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bit(i8);

impl Bit {
    pub const PLUS: Bit = Bit(1);
    pub const MINUS: Bit = Bit(-1);
    pub const ALL: [Bit; 2] = [Bit::PLUS, Bit::MINUS];

    /// Builds a bit from `+1` or `-1`.
    pub fn new(value: i8) -> Result<Self> {
        match value {
            1 => Ok(Bit::PLUS),
            -1 => Ok(Bit::MINUS),
            v => Err(Error::Domain(format!("bipolar bit must be ±1, got {v}"))),
        }
    }

    /// `+1` when `positive`, `-1` otherwise.
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Bit::PLUS
        } else {
            Bit::MINUS
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl std::ops::Mul for Bit {
    type Output = Bit;

    fn mul(self, rhs: Bit) -> Bit {
        Bit(self.0 * rhs.0)
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// Output of a three-level slicer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ternary {
    PlusTwo,
    Zero,
    MinusTwo,
}

impl Ternary {
    pub fn value(self) -> i8 {
        match self {
            Ternary::PlusTwo => 2,
            Ternary::Zero => 0,
            Ternary::MinusTwo => -2,
        }
    }
}

/// One bit's transmission: reference half followed by data half.
#[derive(Debug, Clone, PartialEq)]
pub struct DcskFrame {
    beta: usize,
    chips: Vec<f64>,
}

impl DcskFrame {
    /// Builds the frame for `bit` over an explicit reference.
    pub fn from_reference(bit: Bit, reference: &[f64]) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::Contract(
                "reference must hold at least one chip".into(),
            ));
        }
        let s = bit.as_f64();
        let mut chips = Vec::with_capacity(2 * reference.len());
        chips.extend_from_slice(reference);
        chips.extend(reference.iter().map(|x| s * x));
        Ok(DcskFrame {
            beta: reference.len(),
            chips,
        })
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn reference(&self) -> &[f64] {
        &self.chips[..self.beta]
    }

    pub fn into_chips(self) -> Vec<f64> {
        self.chips
    }

    /// Total frame energy `Σ chips²`.
    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|c| c * c).sum()
    }
}

/// Modulates `bit` with `beta` fresh reference chips drawn from `stream`.
pub fn modulate(bit: Bit, stream: &mut ChaosStream, beta: usize) -> Result<DcskFrame> {
    if beta == 0 {
        return Err(Error::Contract("beta must be at least 1".into()));
    }
    let mut chips = Vec::with_capacity(2 * beta);
    stream.fill(&mut chips, beta);
    let s = bit.as_f64();
    for k in 0..beta {
        let x = chips[k];
        chips.push(s * x);
    }
    Ok(DcskFrame { beta, chips })
}

/// Correlator output of a DCSK receiver.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DecisionStatistic(pub f64);

impl DecisionStatistic {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Correlates the two halves of a received `2β`-chip frame:
/// `Σ_{k<β} r[k]·r[k+β]`.
pub fn correlate(received: &[f64], beta: usize) -> Result<DecisionStatistic> {
    if beta == 0 || received.len() != 2 * beta {
        return Err(Error::Contract(format!(
            "correlator expects {} chips, got {}",
            2 * beta,
            received.len()
        )));
    }
    let (reference, data) = received.split_at(beta);
    Ok(DecisionStatistic(
        reference.iter().zip(data).map(|(r, d)| r * d).sum(),
    ))
}

/// Sign detector; an exact zero decides `+1`.
pub fn detect_binary(d: DecisionStatistic) -> Bit {
    Bit::from_bool(d.0 >= 0.0)
}

/// Three-level slicer with symmetric thresholds `±threshold`.
pub fn detect_ternary(d: DecisionStatistic, threshold: f64) -> Result<Ternary> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!(
            "ternary threshold must be positive, got {threshold}"
        )));
    }
    Ok(if d.0 > threshold {
        Ternary::PlusTwo
    } else if d.0 < -threshold {
        Ternary::MinusTwo
    } else {
        Ternary::Zero
    })
}
