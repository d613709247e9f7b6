//! Two-way relay protocols built on DCSK.
//!
//! A round exchanges one bit from each user. In the first phase the users
//! reach the relay (simultaneously for [`SchemeId::Pnc1`] and
//! [`SchemeId::Anc`], separately for the multiplexed schemes); in the second
//! phase the relay broadcasts one DCSK frame and each user strips its own bit
//! from what it decodes.

use crate::channel::{superpose, DelayLine, LinkRealization, TwoRayLink};
use crate::chaos::ChaosStream;
use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::modem::{self, correlate, detect_binary, detect_ternary, Bit, DcskFrame, Ternary};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Network coding protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// Physical-layer network coding with a shared reference.
    Pnc1,
    /// Time-multiplexed first phase (three slots).
    TimeMux2,
    /// Frequency-multiplexed first phase (two slots, double bandwidth).
    FreqMux3,
    /// Analog network coding (amplify and forward).
    Anc,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::Pnc1,
        SchemeId::TimeMux2,
        SchemeId::FreqMux3,
        SchemeId::Anc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Pnc1 => "pnc1",
            SchemeId::TimeMux2 => "timemux2",
            SchemeId::FreqMux3 => "freqmux3",
            SchemeId::Anc => "anc",
        }
    }

    /// Whether the relay decodes each user separately.
    pub fn is_multiplexed(self) -> bool {
        matches!(self, SchemeId::TimeMux2 | SchemeId::FreqMux3)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pnc1" | "pnc" | "scheme1" => Ok(SchemeId::Pnc1),
            "timemux2" | "snc" | "scheme2" => Ok(SchemeId::TimeMux2),
            "freqmux3" | "scheme3" => Ok(SchemeId::FreqMux3),
            "anc" => Ok(SchemeId::Anc),
            other => Err(Error::InvalidParameter {
                field: "scheme",
                reason: format!(
                    "unknown scheme `{other}` (expected pnc1, timemux2, freqmux3 or anc)"
                ),
            }),
        }
    }
}

/// Complete description of one simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scheme: SchemeId,
    /// Half the spreading factor.
    pub beta: usize,
    /// User A to relay.
    pub hop1_a: TwoRayLink,
    /// User B to relay.
    pub hop1_b: TwoRayLink,
    /// Relay to user B. The relay-to-A hop reuses these statistics.
    pub hop2_b: TwoRayLink,
    pub ebn0_db: f64,
    /// Subtract the shared-reference cross term from the PNC relay statistic.
    pub genie_remove_strong_isi: bool,
    /// PNC relay slicer threshold, in units of `E_b`.
    pub pnc_threshold: f64,
    /// ANC user magnitude threshold, in units of `E_b`.
    pub anc_threshold: f64,
    /// Frames over which the ANC relay averages received power.
    pub anc_packet_bits: usize,
    /// Also recover B's bit at A.
    pub two_sided: bool,
}

impl Scenario {
    pub const MIN_BETA: usize = 8;
    pub const DEFAULT_PNC_THRESHOLD: f64 = 1.0;
    pub const DEFAULT_ANC_THRESHOLD: f64 = 0.25;
    pub const DEFAULT_ANC_PACKET_BITS: usize = 128;

    /// Scenario with default detector settings.
    pub fn new(
        scheme: SchemeId,
        beta: usize,
        hop1_a: TwoRayLink,
        hop1_b: TwoRayLink,
        hop2_b: TwoRayLink,
    ) -> Self {
        Scenario {
            scheme,
            beta,
            hop1_a,
            hop1_b,
            hop2_b,
            ebn0_db: 10.0,
            genie_remove_strong_isi: false,
            pnc_threshold: Self::DEFAULT_PNC_THRESHOLD,
            anc_threshold: Self::DEFAULT_ANC_THRESHOLD,
            anc_packet_bits: Self::DEFAULT_ANC_PACKET_BITS,
            two_sided: false,
        }
    }

    /// All three hops are unit-gain AWGN links.
    pub fn awgn(scheme: SchemeId, beta: usize) -> Self {
        let l = TwoRayLink::awgn();
        Self::new(scheme, beta, l, l, l)
    }

    pub fn with_scheme(mut self, scheme: SchemeId) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_ebn0_db(mut self, ebn0_db: f64) -> Self {
        self.ebn0_db = ebn0_db;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta < Self::MIN_BETA {
            return Err(Error::InvalidParameter {
                field: "beta",
                reason: format!("must be at least {}, got {}", Self::MIN_BETA, self.beta),
            });
        }
        self.hop1_a.validate(self.beta)?;
        self.hop1_b.validate(self.beta)?;
        self.hop2_b.validate(self.beta)?;
        if self.ebn0_db.is_nan() || self.ebn0_db == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter {
                field: "ebn0_db",
                reason: format!("not a usable Eb/N0: {}", self.ebn0_db),
            });
        }
        for (field, t) in [
            ("pnc_threshold", self.pnc_threshold),
            ("anc_threshold", self.anc_threshold),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be positive, got {t}"),
                });
            }
        }
        if self.anc_packet_bits == 0 {
            return Err(Error::InvalidParameter {
                field: "anc_packet_bits",
                reason: "must be at least 1".into(),
            });
        }
        if self.genie_remove_strong_isi && self.scheme != SchemeId::Pnc1 {
            return Err(Error::InvalidParameter {
                field: "genie_remove_strong_isi",
                reason: format!("only meaningful for pnc1, scheme is {}", self.scheme),
            });
        }
        Ok(())
    }

    /// Average bit energy `E_b = 2β` of unit-variance chips.
    pub fn bit_energy(&self) -> f64 {
        2.0 * self.beta as f64
    }

    /// Noise spectral level for the configured Eb/N0 (`+inf` dB gives 0).
    pub fn n0(&self) -> f64 {
        if self.ebn0_db == f64::INFINITY {
            0.0
        } else {
            self.bit_energy() / db_to_linear(self.ebn0_db)
        }
    }

    fn check_scheme(&self, allowed: &[SchemeId], op: &str) -> Result<()> {
        if allowed.contains(&self.scheme) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{op} cannot run scheme {}",
                self.scheme
            )))
        }
    }
}

/// Chaos generators of the three nodes.
///
/// With a shared reference (PNC, ANC) both users draw from `user_a`, which
/// models two generators started from the same seed.
#[derive(Debug, Clone)]
pub struct Streams {
    pub user_a: ChaosStream,
    pub user_b: ChaosStream,
    pub relay: ChaosStream,
}

impl Streams {
    pub fn seed<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Streams {
            user_a: ChaosStream::seed(rng),
            user_b: ChaosStream::seed(rng),
            relay: ChaosStream::seed(rng),
        }
    }
}

/// Delay-line state of every hop.
#[derive(Debug, Clone)]
pub struct Channels {
    pub hop1_a: DelayLine,
    pub hop1_b: DelayLine,
    pub hop2_b: DelayLine,
    pub hop2_a: DelayLine,
}

impl Channels {
    pub fn new(scenario: &Scenario) -> Self {
        Channels {
            hop1_a: DelayLine::new(scenario.hop1_a.delay),
            hop1_b: DelayLine::new(scenario.hop1_b.delay),
            hop2_b: DelayLine::new(scenario.hop2_b.delay),
            hop2_a: DelayLine::new(scenario.hop2_b.delay),
        }
    }
}

/// What happened to one exchanged bit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    pub sent_a: Bit,
    pub sent_b: Bit,
    /// Network-coded bit the relay forwarded (`None` for ANC).
    pub relay_bit: Option<Bit>,
    /// Decision statistic at the relay (first phase, user A for the
    /// multiplexed schemes).
    pub relay_statistic: f64,
    /// `ŝ_A` as recovered by user B.
    pub recovered_a_at_b: Bit,
    /// `ŝ_B` as recovered by user A, when the scenario is two-sided.
    pub recovered_b_at_a: Option<Bit>,
}

impl FrameOutcome {
    pub fn end_to_end_error(&self) -> bool {
        self.recovered_a_at_b != self.sent_a
    }

    /// Whether the relay's network-coded bit differs from `s_A·s_B`.
    pub fn relay_error(&self) -> Option<bool> {
        self.relay_bit
            .map(|b| b != map_network(self.sent_a, self.sent_b))
    }
}

/// Relay mapping of two decoded bits: the bipolar XOR `s_A·s_B`.
pub fn map_network(s_a: Bit, s_b: Bit) -> Bit {
    s_a * s_b
}

/// PNC relay mapping: `±2 -> +1`, `0 -> -1`.
pub fn map_ternary(sym: Ternary) -> Bit {
    match sym {
        Ternary::PlusTwo | Ternary::MinusTwo => Bit::PLUS,
        Ternary::Zero => Bit::MINUS,
    }
}

/// User-side demapping `|s_D + s_own| - 1`.
pub fn demap_at_user(s_decoded: Bit, own_bit: Bit) -> Bit {
    let m = (s_decoded.value() + own_bit.value()).abs() - 1;
    Bit::new(m).expect("|±1 ± 1| - 1 is ±1")
}

fn draw<R: Rng + ?Sized>(link: &TwoRayLink, rng: &mut R) -> LinkRealization {
    link.draw_realization(rng)
}

/// Second phase: the relay broadcasts `relay_bit`, B (and optionally A)
/// decode and strip their own bit.
fn broadcast<R: Rng + ?Sized>(
    scenario: &Scenario,
    relay_bit: Bit,
    bits: (Bit, Bit),
    streams: &mut Streams,
    channels: &mut Channels,
    n0: f64,
    rng: &mut R,
) -> Result<(Bit, Option<Bit>)> {
    let beta = scenario.beta;
    let frame = modem::modulate(relay_bit, &mut streams.relay, beta)?;
    let real_b = draw(&scenario.hop2_b, rng);
    let rx_b = channels.hop2_b.transmit(frame.chips(), &real_b, n0, rng)?;
    let s_d = detect_binary(correlate(&rx_b, beta)?);
    let at_b = demap_at_user(s_d, bits.1);
    let at_a = if scenario.two_sided {
        let real_a = draw(&scenario.hop2_b, rng);
        let rx_a = channels.hop2_a.transmit(frame.chips(), &real_a, n0, rng)?;
        let s_d = detect_binary(correlate(&rx_a, beta)?);
        Some(demap_at_user(s_d, bits.0))
    } else {
        None
    };
    Ok((at_b, at_a))
}

/// First phase of the shared-reference schemes: both users send frames
/// built on one reference; they superpose with a single noise process.
///
/// Returns the relay reception, the shared reference and both realizations.
fn superposed_uplink<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: (Bit, Bit),
    streams: &mut Streams,
    channels: &mut Channels,
    n0: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, LinkRealization, LinkRealization)> {
    let reference = streams.user_a.take(scenario.beta);
    let e_a = DcskFrame::from_reference(bits.0, &reference)?;
    let e_b = DcskFrame::from_reference(bits.1, &reference)?;
    let real_a = draw(&scenario.hop1_a, rng);
    let real_b = draw(&scenario.hop1_b, rng);
    let rx_a = channels.hop1_a.transmit(e_a.chips(), &real_a, n0, rng)?;
    let rx_b = channels.hop1_b.transmit(e_b.chips(), &real_b, 0.0, rng)?;
    Ok((superpose(&rx_a, &rx_b)?, reference, real_a, real_b))
}

/// Strong cross term `(s_A+s_B)(λ₁ᴬλ₁ᴮ Σx_k² + λ₂ᴬλ₂ᴮ Σx_{k-τA}x_{k-τB})`
/// of the PNC relay statistic, with reference chips before the frame taken
/// as zero.
pub fn strong_isi_term(
    bits: (Bit, Bit),
    reference: &[f64],
    real_a: &LinkRealization,
    real_b: &LinkRealization,
) -> f64 {
    let delayed = |k: usize, tau: usize| if k >= tau { reference[k - tau] } else { 0.0 };
    let energy: f64 = reference.iter().map(|x| x * x).sum();
    let cross: f64 = (0..reference.len())
        .map(|k| delayed(k, real_a.delay) * delayed(k, real_b.delay))
        .sum();
    let s = bits.0.as_f64() + bits.1.as_f64();
    s * (real_a.lambda_1 * real_b.lambda_1 * energy + real_a.lambda_2 * real_b.lambda_2 * cross)
}

/// One round of physical-layer network coding (scheme 1).
pub fn run_pnc_frame<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: (Bit, Bit),
    streams: &mut Streams,
    channels: &mut Channels,
    rng: &mut R,
) -> Result<FrameOutcome> {
    scenario.check_scheme(&[SchemeId::Pnc1], "run_pnc_frame")?;
    let n0 = scenario.n0();
    let (rx, reference, real_a, real_b) =
        superposed_uplink(scenario, bits, streams, channels, n0, rng)?;
    let mut d = correlate(&rx, scenario.beta)?.value();
    if scenario.genie_remove_strong_isi {
        d -= strong_isi_term(bits, &reference, &real_a, &real_b);
    }
    let symbol = detect_ternary(
        modem::DecisionStatistic(d),
        scenario.pnc_threshold * scenario.bit_energy(),
    )?;
    let relay_bit = map_ternary(symbol);
    let (at_b, at_a) = broadcast(scenario, relay_bit, bits, streams, channels, n0, rng)?;
    Ok(FrameOutcome {
        sent_a: bits.0,
        sent_b: bits.1,
        relay_bit: Some(relay_bit),
        relay_statistic: d,
        recovered_a_at_b: at_b,
        recovered_b_at_a: at_a,
    })
}

/// One round of the multiplexed schemes (2 and 3).
///
/// Both schemes deliver two interference-free receptions to the relay; they
/// differ only in slot and bandwidth accounting, so the signal path is shared.
pub fn run_mux_frame<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: (Bit, Bit),
    streams: &mut Streams,
    channels: &mut Channels,
    rng: &mut R,
) -> Result<FrameOutcome> {
    scenario.check_scheme(&[SchemeId::TimeMux2, SchemeId::FreqMux3], "run_mux_frame")?;
    let n0 = scenario.n0();
    let beta = scenario.beta;
    let e_a = modem::modulate(bits.0, &mut streams.user_a, beta)?;
    let e_b = modem::modulate(bits.1, &mut streams.user_b, beta)?;
    let real_a = draw(&scenario.hop1_a, rng);
    let real_b = draw(&scenario.hop1_b, rng);
    let rx_a = channels.hop1_a.transmit(e_a.chips(), &real_a, n0, rng)?;
    let rx_b = channels.hop1_b.transmit(e_b.chips(), &real_b, n0, rng)?;
    let d_a = correlate(&rx_a, beta)?;
    let d_b = correlate(&rx_b, beta)?;
    let relay_bit = map_network(detect_binary(d_a), detect_binary(d_b));
    let (at_b, at_a) = broadcast(scenario, relay_bit, bits, streams, channels, n0, rng)?;
    Ok(FrameOutcome {
        sent_a: bits.0,
        sent_b: bits.1,
        relay_bit: Some(relay_bit),
        relay_statistic: d_a.value(),
        recovered_a_at_b: at_b,
        recovered_b_at_a: at_a,
    })
}

/// One packet of analog network coding.
///
/// The relay scales every received frame of the packet by
/// `G = sqrt(1 / mean(r²))`, restoring unit chip power, and forwards it.
/// Users declare `s_D = +1` when `|D|` exceeds the magnitude threshold.
pub fn run_anc_packet<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: &[(Bit, Bit)],
    streams: &mut Streams,
    channels: &mut Channels,
    rng: &mut R,
) -> Result<Vec<FrameOutcome>> {
    scenario.check_scheme(&[SchemeId::Anc], "run_anc_packet")?;
    if bits.is_empty() {
        return Ok(Vec::new());
    }
    let n0 = scenario.n0();
    let beta = scenario.beta;
    let mut received = Vec::with_capacity(bits.len());
    let mut power = 0.0;
    for &pair in bits {
        let (rx, ..) = superposed_uplink(scenario, pair, streams, channels, n0, rng)?;
        power += rx.iter().map(|r| r * r).sum::<f64>();
        received.push((rx, pair));
    }
    power /= (bits.len() * 2 * beta) as f64;
    let gain = if power > 0.0 {
        power.recip().sqrt()
    } else {
        0.0
    };
    let threshold = scenario.anc_threshold * scenario.bit_energy();

    let decide = |rx: &[f64], own: Bit| -> Result<Bit> {
        let d = correlate(rx, beta)?.value();
        Ok(demap_at_user(Bit::from_bool(d.abs() > threshold), own))
    };

    let mut outcomes = Vec::with_capacity(bits.len());
    for (rx, (s_a, s_b)) in received {
        let forwarded: Vec<f64> = rx.iter().map(|r| gain * r).collect();
        let d_relay = correlate(&rx, beta)?.value();
        let real = draw(&scenario.hop2_b, rng);
        let at_b = decide(&channels.hop2_b.transmit(&forwarded, &real, n0, rng)?, s_b)?;
        let at_a = if scenario.two_sided {
            let real = draw(&scenario.hop2_b, rng);
            Some(decide(
                &channels.hop2_a.transmit(&forwarded, &real, n0, rng)?,
                s_a,
            )?)
        } else {
            None
        };
        outcomes.push(FrameOutcome {
            sent_a: s_a,
            sent_b: s_b,
            relay_bit: None,
            relay_statistic: d_relay,
            recovered_a_at_b: at_b,
            recovered_b_at_a: at_a,
        });
    }
    Ok(outcomes)
}

/// One ANC round (a packet of a single frame).
pub fn run_anc_frame<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: (Bit, Bit),
    streams: &mut Streams,
    channels: &mut Channels,
    rng: &mut R,
) -> Result<FrameOutcome> {
    Ok(run_anc_packet(scenario, &[bits], streams, channels, rng)?[0])
}

/// Runs consecutive rounds of whichever scheme the scenario names.
pub fn run_frames<R: Rng + ?Sized>(
    scenario: &Scenario,
    bits: &[(Bit, Bit)],
    streams: &mut Streams,
    channels: &mut Channels,
    rng: &mut R,
) -> Result<Vec<FrameOutcome>> {
    match scenario.scheme {
        SchemeId::Anc => {
            let mut out = Vec::with_capacity(bits.len());
            for packet in bits.chunks(scenario.anc_packet_bits) {
                out.extend(run_anc_packet(scenario, packet, streams, channels, rng)?);
            }
            Ok(out)
        }
        SchemeId::Pnc1 => bits
            .iter()
            .map(|&b| run_pnc_frame(scenario, b, streams, channels, rng))
            .collect(),
        SchemeId::TimeMux2 | SchemeId::FreqMux3 => bits
            .iter()
            .map(|&b| run_mux_frame(scenario, b, streams, channels, rng))
            .collect(),
    }
}

/// Time and bandwidth needed for one end-to-end exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotBudget {
    pub time_slots: u32,
    /// Exchange duration `T_n`.
    pub t_n: f64,
    /// Occupied bandwidth.
    pub bandwidth: f64,
}

/// Slot count, exchange time and bandwidth with `W_s = 1/T_c`.
pub fn slot_and_bandwidth(scheme: SchemeId, beta: usize, t_c: f64) -> SlotBudget {
    let slots = match scheme {
        SchemeId::TimeMux2 => 3,
        SchemeId::Pnc1 | SchemeId::FreqMux3 | SchemeId::Anc => 2,
    };
    let w_s = 1.0 / t_c;
    let bandwidth = match scheme {
        SchemeId::FreqMux3 => 2.0 * w_s,
        _ => w_s,
    };
    SlotBudget {
        time_slots: slots,
        t_n: f64::from(slots) * 2.0 * beta as f64 * t_c,
        bandwidth,
    }
}

/// Relay workload for a packet of `packet_bits` bits per user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelayOps {
    pub decode: u64,
    pub map: u64,
    pub modulate: u64,
}

pub fn relay_op_counts(scheme: SchemeId, packet_bits: u64) -> RelayOps {
    let p = packet_bits;
    match scheme {
        SchemeId::Pnc1 => RelayOps {
            decode: p,
            map: p,
            modulate: p,
        },
        SchemeId::TimeMux2 | SchemeId::FreqMux3 => RelayOps {
            decode: 2 * p,
            map: p,
            modulate: p,
        },
        SchemeId::Anc => RelayOps {
            decode: 0,
            map: 0,
            modulate: 0,
        },
    }
}
