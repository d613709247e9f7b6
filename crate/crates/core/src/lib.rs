//! Baseband simulation and closed-form analysis of network-coded DCSK
//! (differential chaos shift keying) two-way relay networks.
//!
//! Two users `A` and `B` exchange one bit each per round through a relay `R`.
//! Four protocols are modelled:
//!
//! * [`SchemeId::Pnc1`]: both users transmit simultaneously with a shared
//!   chaotic reference and the relay decodes the superposition into a ternary
//!   symbol (physical-layer network coding).
//! * [`SchemeId::TimeMux2`]: users transmit in separate slots; the relay
//!   decodes each bit and forwards their bipolar product (three slots).
//! * [`SchemeId::FreqMux3`]: as `TimeMux2` but on orthogonal subchannels
//!   (two slots, twice the bandwidth).
//! * [`SchemeId::Anc`]: the relay amplifies and forwards the received
//!   superposition.
//!
//! Every hop is a two-ray Rayleigh channel with block fading, an integer chip
//! delay and additive white Gaussian noise. [`montecarlo`] runs reproducible
//! BER sweeps over these models and [`analysis`] provides the matching
//! closed-form expressions for the multiplexed schemes.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod chaos;
mod error;
pub mod modem;
pub mod montecarlo;
pub mod schemes;

pub use channel::{DelayLine, Fading, LinkRealization, TwoRayLink};
pub use chaos::ChaosStream;
pub use error::{Error, Result};
pub use modem::{Bit, DcskFrame, DecisionStatistic, Ternary};
pub use montecarlo::{BerEstimate, ErrorTarget, MetricRow, MetricSeries, Simulator, StoppingRule};
pub use schemes::{FrameOutcome, Scenario, SchemeId};

/// Converts a ratio in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
