//! Reproducible Monte Carlo BER estimation.
//!
//! Every grid point is simulated in fixed-size blocks of frames. Block `b` of
//! point `p` draws all of its randomness (chaos seeds, fading, noise and data
//! bits) from a ChaCha8 generator seeded with [`child_seed`]`(master, p, b)`,
//! and starts with empty delay lines. Blocks are evaluated in parallel waves
//! and merged strictly in block order, with the stopping rule checked after
//! each block, so the result depends only on the master seed and never on
//! the number of worker threads.

use crate::analysis::{self, scheme_throughput, spectral_efficiency};
use crate::error::{Error, Result};
use crate::modem::Bit;
use crate::schemes::{run_frames, Channels, Scenario, SchemeId, Streams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Frames simulated per block unless configured otherwise.
pub const DEFAULT_BLOCK_FRAMES: usize = 1024;

/// When to stop simulating a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_errors: 100,
            max_bits: 10_000_000,
        }
    }
}

impl StoppingRule {
    pub fn new(min_errors: u64, max_bits: u64) -> Result<Self> {
        let rule = StoppingRule {
            min_errors,
            max_bits,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 {
            return Err(Error::InvalidParameter {
                field: "min_errors",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_bits < self.min_errors {
            return Err(Error::InvalidParameter {
                field: "max_bits",
                reason: format!(
                    "must be at least min_errors ({}), got {}",
                    self.min_errors, self.max_bits
                ),
            });
        }
        Ok(())
    }
}

/// Which decision is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorTarget {
    /// The bit recovered by the far user (B recovering A, and A recovering B
    /// in two-sided scenarios).
    #[default]
    EndToEnd,
    /// The network-coded bit formed at the relay. Not defined for ANC.
    Relay,
}

/// Error count and 95% confidence interval at one Eb/N0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub point_ebn0_db: f64,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub ci95_halfwidth: f64,
    /// The bit budget ran out before `min_errors` errors were seen; the
    /// estimate is at best an upper bound.
    pub flagged: bool,
}

impl BerEstimate {
    pub fn from_counts(point_ebn0_db: f64, errors: u64, bits: u64, flagged: bool) -> Self {
        let (ber, ci) = if bits == 0 {
            (0.0, 0.0)
        } else {
            let n = bits as f64;
            let p = errors as f64 / n;
            (p, Z95 * (p * (1.0 - p) / n).sqrt())
        };
        BerEstimate {
            point_ebn0_db,
            errors,
            bits,
            ber,
            ci95_halfwidth: ci,
            flagged,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of block `block` of grid point `point`.
///
/// `mix64(mix64(mix64(master + φ) ^ (point + 1)·φ) ^ (block + 1)·φ)` with
/// `φ = 0x9e3779b97f4a7c15` and wrapping arithmetic.
pub fn child_seed(master: u64, point: u64, block: u64) -> u64 {
    const PHI: u64 = 0x9e37_79b9_7f4a_7c15;
    let h = mix64(master.wrapping_add(PHI));
    let h = mix64(h ^ point.wrapping_add(1).wrapping_mul(PHI));
    mix64(h ^ block.wrapping_add(1).wrapping_mul(PHI))
}

/// Errors and scored bits of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Tally {
    errors: u64,
    bits: u64,
}

/// Parallel BER estimator.
#[derive(Clone)]
pub struct Simulator {
    pool: Option<Arc<rayon::ThreadPool>>,
    wave: usize,
    block_frames: usize,
    target: ErrorTarget,
    include_term_c: bool,
}

impl std::fmt::Debug for Simulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulator")
            .field("wave", &self.wave)
            .field("block_frames", &self.block_frames)
            .field("target", &self.target)
            .field("include_term_c", &self.include_term_c)
            .finish()
    }
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator {
            pool: None,
            wave: rayon::current_num_threads().max(1),
            block_frames: DEFAULT_BLOCK_FRAMES,
            target: ErrorTarget::EndToEnd,
            include_term_c: false,
        }
    }
}

impl Simulator {
    /// Simulator on the global rayon pool.
    pub fn new() -> Self {
        Self::default()
    }

    /// Simulator on a dedicated pool of `workers` threads.
    pub fn with_workers(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidParameter {
                field: "workers",
                reason: "must be at least 1".into(),
            });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
        Ok(Simulator {
            pool: Some(Arc::new(pool)),
            wave: workers,
            ..Self::default()
        })
    }

    pub fn block_frames(mut self, frames: usize) -> Result<Self> {
        if frames == 0 {
            return Err(Error::InvalidParameter {
                field: "block_frames",
                reason: "must be at least 1".into(),
            });
        }
        self.block_frames = frames;
        Ok(self)
    }

    pub fn target(mut self, target: ErrorTarget) -> Self {
        self.target = target;
        self
    }

    /// Keep the cross-product variance term in the analytical column.
    pub fn include_term_c(mut self, on: bool) -> Self {
        self.include_term_c = on;
        self
    }

    pub fn workers(&self) -> usize {
        self.wave
    }

    fn run_block(&self, scenario: &Scenario, frames: usize, seed: u64) -> Result<Tally> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut streams = Streams::seed(&mut rng);
        let mut channels = Channels::new(scenario);
        let bits: Vec<(Bit, Bit)> = (0..frames)
            .map(|_| (Bit::from_bool(rng.random()), Bit::from_bool(rng.random())))
            .collect();
        let outcomes = run_frames(scenario, &bits, &mut streams, &mut channels, &mut rng)?;
        let mut tally = Tally::default();
        for o in &outcomes {
            match self.target {
                ErrorTarget::EndToEnd => {
                    tally.bits += 1;
                    tally.errors += u64::from(o.end_to_end_error());
                    if let Some(b) = o.recovered_b_at_a {
                        tally.bits += 1;
                        tally.errors += u64::from(b != o.sent_b);
                    }
                }
                ErrorTarget::Relay => {
                    let e = o
                        .relay_error()
                        .ok_or(Error::UnsupportedScheme(scenario.scheme))?;
                    tally.bits += 1;
                    tally.errors += u64::from(e);
                }
            }
        }
        Ok(tally)
    }

    fn bits_per_frame(&self, scenario: &Scenario) -> u64 {
        match self.target {
            ErrorTarget::EndToEnd if scenario.two_sided => 2,
            _ => 1,
        }
    }

    fn install<T: Send>(&self, op: impl FnOnce() -> T + Send) -> T {
        match &self.pool {
            Some(pool) => pool.install(op),
            None => op(),
        }
    }

    /// BER of the grid point with index `point_index` (which selects its
    /// seed stream) at `ebn0_db`.
    pub fn estimate_point_indexed(
        &self,
        scenario: &Scenario,
        ebn0_db: f64,
        rule: StoppingRule,
        master_seed: u64,
        point_index: u64,
    ) -> Result<BerEstimate> {
        rule.validate()?;
        let scenario = scenario.clone().with_ebn0_db(ebn0_db);
        scenario.validate()?;
        if self.target == ErrorTarget::Relay && scenario.scheme == SchemeId::Anc {
            return Err(Error::UnsupportedScheme(SchemeId::Anc));
        }
        let per_frame = self.bits_per_frame(&scenario);
        let frames_left = |bits: u64| {
            let left = (rule.max_bits - bits).div_ceil(per_frame);
            left.min(self.block_frames as u64) as usize
        };

        let (mut errors, mut bits) = (0u64, 0u64);
        let mut next_block = 0u64;
        loop {
            // Plan a wave as if no block in it stops the run; blocks past the
            // stopping point are discarded, so the plan never affects results.
            let mut plan = Vec::with_capacity(self.wave);
            let mut planned_bits = bits;
            while plan.len() < self.wave && planned_bits < rule.max_bits {
                let frames = frames_left(planned_bits);
                plan.push((next_block + plan.len() as u64, frames));
                planned_bits += frames as u64 * per_frame;
            }
            let tallies: Vec<Result<Tally>> = self.install(|| {
                plan.par_iter()
                    .map(|&(block, frames)| {
                        let seed = child_seed(master_seed, point_index, block);
                        self.run_block(&scenario, frames, seed)
                    })
                    .collect()
            });
            for tally in tallies {
                let tally = tally?;
                errors += tally.errors;
                bits += tally.bits;
                next_block += 1;
                if errors >= rule.min_errors {
                    return Ok(BerEstimate::from_counts(ebn0_db, errors, bits, false));
                }
                if bits >= rule.max_bits {
                    return Ok(BerEstimate::from_counts(ebn0_db, errors, bits, true));
                }
            }
        }
    }

    /// BER at `ebn0_db`, seeded as the first point of a sweep.
    pub fn estimate_point(
        &self,
        scenario: &Scenario,
        ebn0_db: f64,
        rule: StoppingRule,
        master_seed: u64,
    ) -> Result<BerEstimate> {
        self.estimate_point_indexed(scenario, ebn0_db, rule, master_seed, 0)
    }

    /// Simulated and analytical metrics over an ascending Eb/N0 grid.
    pub fn sweep(
        &self,
        scenario: &Scenario,
        ebn0_grid_db: &[f64],
        rule: StoppingRule,
        master_seed: u64,
    ) -> Result<MetricSeries> {
        check_grid(ebn0_grid_db)?;
        let mut rows = Vec::with_capacity(ebn0_grid_db.len());
        for (i, &db) in ebn0_grid_db.iter().enumerate() {
            let estimate =
                self.estimate_point_indexed(scenario, db, rule, master_seed, i as u64)?;
            rows.push(MetricRow::new(
                &scenario.clone().with_ebn0_db(db),
                estimate,
                self.target,
                self.include_term_c,
            )?);
        }
        Ok(MetricSeries {
            scheme: scenario.scheme,
            beta: scenario.beta,
            master_seed,
            rows,
        })
    }
}

/// Default-configured [`Simulator::estimate_point`].
pub fn estimate_point(
    scenario: &Scenario,
    ebn0_db: f64,
    rule: StoppingRule,
    master_seed: u64,
) -> Result<BerEstimate> {
    Simulator::new().estimate_point(scenario, ebn0_db, rule, master_seed)
}

/// Default-configured [`Simulator::sweep`].
pub fn sweep(
    scenario: &Scenario,
    ebn0_grid_db: &[f64],
    rule: StoppingRule,
    master_seed: u64,
) -> Result<MetricSeries> {
    Simulator::new().sweep(scenario, ebn0_grid_db, rule, master_seed)
}

/// Rejects empty, non-finite or non-ascending grids.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            field: "grid",
            reason: "Eb/N0 grid is empty".into(),
        });
    }
    if grid.iter().any(|g| g.is_nan()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            field: "grid",
            reason: format!("Eb/N0 grid must be strictly ascending, got {grid:?}"),
        });
    }
    Ok(())
}

/// Metrics at one Eb/N0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub ebn0_db: f64,
    pub estimate: BerEstimate,
    /// Closed-form BER of the scored decision (multiplexed schemes only).
    pub ber_analytic: Option<f64>,
    /// Throughput with `T_c = 1` from the simulated BER.
    pub throughput_sim: f64,
    pub throughput_analytic: Option<f64>,
    /// Spectral efficiency from the simulated BER (multiplexed schemes only).
    pub efficiency_sim: Option<f64>,
    pub efficiency_analytic: Option<f64>,
}

impl MetricRow {
    /// Completes a simulated estimate with the closed-form metrics of
    /// `scenario` at its configured Eb/N0.
    pub fn new(
        scenario: &Scenario,
        estimate: BerEstimate,
        target: ErrorTarget,
        include_term_c: bool,
    ) -> Result<Self> {
        let (scheme, beta) = (scenario.scheme, scenario.beta);
        let ber_analytic = if scheme.is_multiplexed() && scenario.ebn0_db.is_finite() {
            let a = analysis::analytic_ber(scenario, include_term_c)?;
            Some(match target {
                ErrorTarget::EndToEnd => a.end_to_end,
                ErrorTarget::Relay => analysis::relay_ber(a.links.ber_1a, a.links.ber_1b)?,
            })
        } else {
            None
        };
        let efficiency = |ber: f64| {
            if scheme.is_multiplexed() {
                spectral_efficiency(scheme, ber, beta).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(MetricRow {
            ebn0_db: scenario.ebn0_db,
            estimate,
            ber_analytic,
            throughput_sim: scheme_throughput(scheme, estimate.ber, beta)?,
            throughput_analytic: ber_analytic
                .map(|b| scheme_throughput(scheme, b, beta))
                .transpose()?,
            efficiency_sim: efficiency(estimate.ber)?,
            efficiency_analytic: match ber_analytic {
                Some(b) => efficiency(b)?,
                None => None,
            },
        })
    }
}

/// One scheme's sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub scheme: SchemeId,
    pub beta: usize,
    pub master_seed: u64,
    pub rows: Vec<MetricRow>,
}

impl MetricSeries {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.estimate.flagged)
    }
}
