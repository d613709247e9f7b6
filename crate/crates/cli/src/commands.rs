//! The `simulate`, `analyze` and `compare` commands.
//!
//! Each command turns validated configs into a rendered CSV plus a flag
//! telling the caller whether any point ran out of bits.

use crate::config::ExperimentConfig;
use crate::output::{
    self, AnalyzeRecord, CompareRecord, Provenance, SimRecord, ANALYZE_COLUMNS, COMPARE_COLUMNS,
    SIMULATE_COLUMNS,
};
use anyhow::{bail, Result};
use dcsk_core::analysis::{analytic_ber, scheme_throughput, special_case_ber, spectral_efficiency};
use dcsk_core::montecarlo::{MetricSeries, Simulator};
use dcsk_core::SchemeId;

/// A config together with the path it was read from.
#[derive(Debug, Clone)]
pub struct Input {
    pub path: String,
    pub config: ExperimentConfig,
}

/// Command-line overrides shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<Vec<f64>>,
    pub schemes: Vec<SchemeId>,
}

impl Overrides {
    fn seed(&self, config: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(config.master_seed)
    }

    fn grid<'a>(&'a self, config: &'a ExperimentConfig) -> &'a [f64] {
        self.grid.as_deref().unwrap_or(&config.grid)
    }

    /// The config once per requested scheme (or once, unchanged).
    fn expand(&self, config: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        if self.schemes.is_empty() {
            return Ok(vec![config.clone()]);
        }
        self.schemes
            .iter()
            .map(|&s| Ok(config.clone().with_scheme(s)?))
            .collect()
    }
}

/// Rendered CSV and whether any point hit its bit budget.
#[derive(Debug, Clone)]
pub struct Report {
    pub csv: Vec<u8>,
    pub flagged: bool,
}

fn provenance(command: &'static str, inputs: &[Input], seed: Option<u64>) -> Provenance {
    Provenance {
        command,
        configs: inputs
            .iter()
            .map(|i| (i.path.clone(), i.config.source_hash.clone()))
            .collect(),
        seed,
    }
}

fn run_sweep(config: &ExperimentConfig, sim: &Simulator, ov: &Overrides) -> Result<MetricSeries> {
    let sim = sim
        .clone()
        .target(config.target)
        .include_term_c(config.include_term_c);
    Ok(sim.sweep(
        &config.scenario,
        ov.grid(config),
        config.rule,
        ov.seed(config),
    )?)
}

pub fn simulate(input: &Input, sim: &Simulator, ov: &Overrides) -> Result<Report> {
    let configs = ov.expand(&input.config)?;
    if configs.len() != 1 {
        bail!("simulate takes a single scheme; use compare for several");
    }
    let config = &configs[0];
    let series = run_sweep(config, sim, ov)?;
    let rows: Vec<Vec<String>> = series
        .rows
        .iter()
        .map(|r| {
            SimRecord {
                ebn0_db: r.ebn0_db,
                scheme: series.scheme,
                ber_sim: r.estimate.ber,
                ci95: r.estimate.ci95_halfwidth,
                bits: r.estimate.bits,
                errors: r.estimate.errors,
                ber_analytic: r.ber_analytic,
                flagged: r.estimate.flagged,
            }
            .to_row()
        })
        .collect();
    let prov = provenance(
        "simulate",
        std::slice::from_ref(input),
        Some(ov.seed(config)),
    );
    Ok(Report {
        csv: output::render(&prov, &SIMULATE_COLUMNS, &rows)?,
        flagged: series.any_flagged(),
    })
}

/// Closed-form table for the multiplexed schemes (independent of the
/// configured scheme).
pub fn analyze_records(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<AnalyzeRecord>> {
    let sc = &config.scenario;
    let beta = sc.beta;
    grid.iter()
        .map(|&db| {
            let ber = match config.special_case {
                Some(case) if !config.include_term_c => {
                    special_case_ber(case, db, beta, &sc.hop1_a, &sc.hop1_b, &sc.hop2_b)?
                }
                _ => analytic_ber(
                    &sc.clone().with_scheme(SchemeId::TimeMux2).with_ebn0_db(db),
                    config.include_term_c,
                )?,
            };
            let e2e = ber.end_to_end;
            Ok(AnalyzeRecord {
                ebn0_db: db,
                ber_1a: ber.links.ber_1a,
                ber_1b: ber.links.ber_1b,
                ber_2b: ber.links.ber_2b,
                ber_e2e: e2e,
                throughput_s2: scheme_throughput(SchemeId::TimeMux2, e2e, beta)?,
                throughput_s3: scheme_throughput(SchemeId::FreqMux3, e2e, beta)?,
                gamma_t: spectral_efficiency(SchemeId::TimeMux2, e2e, beta)?,
                gamma_f: spectral_efficiency(SchemeId::FreqMux3, e2e, beta)?,
            })
        })
        .collect()
}

pub fn analyze(input: &Input, ov: &Overrides) -> Result<Report> {
    let records = analyze_records(&input.config, ov.grid(&input.config))?;
    let rows: Vec<Vec<String>> = records.iter().map(AnalyzeRecord::to_row).collect();
    let prov = provenance("analyze", std::slice::from_ref(input), None);
    Ok(Report {
        csv: output::render(&prov, &ANALYZE_COLUMNS, &rows)?,
        flagged: false,
    })
}

/// Long-format rows of one simulated series.
pub fn compare_records(series: &MetricSeries) -> Vec<CompareRecord> {
    let mut out = Vec::new();
    for r in &series.rows {
        let metrics = [
            ("ber_sim", Some(r.estimate.ber)),
            ("ci95", Some(r.estimate.ci95_halfwidth)),
            ("ber_analytic", r.ber_analytic),
            ("throughput_sim", Some(r.throughput_sim)),
            ("throughput_analytic", r.throughput_analytic),
            ("efficiency_sim", r.efficiency_sim),
            ("efficiency_analytic", r.efficiency_analytic),
        ];
        for (metric, value) in metrics {
            if let Some(value) = value {
                out.push(CompareRecord {
                    scheme: series.scheme,
                    ebn0_db: r.ebn0_db,
                    metric: metric.into(),
                    value,
                });
            }
        }
    }
    out
}

pub fn compare(inputs: &[Input], sim: &Simulator, ov: &Overrides) -> Result<Report> {
    if inputs.is_empty() {
        bail!("compare needs at least one --config");
    }
    let mut rows = Vec::new();
    let mut flagged = false;
    for input in inputs {
        for config in ov.expand(&input.config)? {
            let series = run_sweep(&config, sim, ov)?;
            flagged |= series.any_flagged();
            rows.extend(compare_records(&series).iter().map(CompareRecord::to_row));
        }
    }
    let prov = provenance("compare", inputs, ov.seed);
    Ok(Report {
        csv: output::render(&prov, &COMPARE_COLUMNS, &rows)?,
        flagged,
    })
}
