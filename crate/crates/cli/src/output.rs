//! CSV tables with a `#` provenance header.
//!
//! Reals are written with 12 significant digits in the shortest form that
//! reads back to the same 12-digit value. Missing values are empty fields.

use anyhow::{anyhow, bail, Context, Result};
use dcsk_core::SchemeId;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

/// Version of the column layout and header format.
pub const FORMAT_VERSION: u32 = 1;

pub const SIMULATE_COLUMNS: [&str; 8] = [
    "ebn0_db",
    "scheme",
    "ber_sim",
    "ci95",
    "bits",
    "errors",
    "ber_analytic",
    "flagged",
];

pub const ANALYZE_COLUMNS: [&str; 9] = [
    "ebn0_db",
    "ber_1a",
    "ber_1b",
    "ber_2b",
    "ber_e2e",
    "throughput_s2",
    "throughput_s3",
    "gamma_t",
    "gamma_f",
];

pub const COMPARE_COLUMNS: [&str; 4] = ["scheme", "ebn0_db", "metric", "value"];

/// Rounds to 12 significant digits and prints the shortest exact form.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let magnitude = rounded.abs();
    if rounded == 0.0 || (1e-4..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Where a table came from.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    /// `(config path, SHA-256 of its contents)` per input file.
    pub configs: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Provenance {
    fn write(&self, out: &mut Vec<u8>) {
        let mut line = |s: String| {
            out.extend_from_slice(s.as_bytes());
            out.push(b'\n');
        };
        line(format!(
            "# dcsk-nc {} format={FORMAT_VERSION}",
            self.command
        ));
        for (path, hash) in &self.configs {
            line(format!("# config_sha256={hash} path={path}"));
        }
        if let Some(seed) = self.seed {
            line(format!("# seed={seed}"));
        }
    }
}

/// Renders a header row and records under the provenance comment block.
pub fn render(provenance: &Provenance, columns: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    provenance.write(&mut out);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| anyhow!("cannot finish CSV: {}", e.error()))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = path else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub ebn0_db: f64,
    pub scheme: SchemeId,
    pub ber_sim: f64,
    pub ci95: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber_analytic: Option<f64>,
    pub flagged: bool,
}

impl SimRecord {
    pub fn to_row(&self) -> Vec<String> {
        vec![
            fmt_real(self.ebn0_db),
            self.scheme.to_string(),
            fmt_real(self.ber_sim),
            fmt_real(self.ci95),
            self.bits.to_string(),
            self.errors.to_string(),
            fmt_opt(self.ber_analytic),
            self.flagged.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRecord {
    pub ebn0_db: f64,
    pub ber_1a: f64,
    pub ber_1b: f64,
    pub ber_2b: f64,
    pub ber_e2e: f64,
    pub throughput_s2: f64,
    pub throughput_s3: f64,
    pub gamma_t: f64,
    pub gamma_f: f64,
}

impl AnalyzeRecord {
    pub fn to_row(&self) -> Vec<String> {
        [
            self.ebn0_db,
            self.ber_1a,
            self.ber_1b,
            self.ber_2b,
            self.ber_e2e,
            self.throughput_s2,
            self.throughput_s3,
            self.gamma_t,
            self.gamma_f,
        ]
        .into_iter()
        .map(fmt_real)
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRecord {
    pub scheme: SchemeId,
    pub ebn0_db: f64,
    pub metric: String,
    pub value: f64,
}

impl CompareRecord {
    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.scheme.to_string(),
            fmt_real(self.ebn0_db),
            self.metric.clone(),
            fmt_real(self.value),
        ]
    }
}

/// Header-indexed access to a parsed CSV.
struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(header: &csv::StringRecord, expected: &[&str]) -> Result<Self> {
        let found: Vec<&str> = header.iter().collect();
        if found != expected {
            bail!("unexpected columns {found:?}, expected {expected:?}");
        }
        Ok(Columns {
            index: found
                .iter()
                .enumerate()
                .map(|(i, c)| (c.to_string(), i))
                .collect(),
        })
    }

    fn raw<'r>(&self, rec: &'r csv::StringRecord, col: &str) -> &'r str {
        rec.get(self.index[col]).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, rec: &csv::StringRecord, col: &str) -> Result<T>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        let raw = self.raw(rec, col);
        raw.parse()
            .with_context(|| format!("column {col}: cannot parse `{raw}`"))
    }

    fn opt(&self, rec: &csv::StringRecord, col: &str) -> Result<Option<f64>> {
        match self.raw(rec, col) {
            "" => Ok(None),
            _ => self.parse(rec, col).map(Some),
        }
    }
}

fn read_table<T>(
    input: impl Read,
    expected: &[&str],
    row: impl Fn(&Columns, &csv::StringRecord) -> Result<T>,
) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let cols = Columns::new(r.headers()?, expected)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(row(&cols, &rec).with_context(|| format!("data row {}", i + 1))?);
    }
    Ok(out)
}

pub fn read_simulate(input: impl Read) -> Result<Vec<SimRecord>> {
    read_table(input, &SIMULATE_COLUMNS, |c, r| {
        Ok(SimRecord {
            ebn0_db: c.parse(r, "ebn0_db")?,
            scheme: c.raw(r, "scheme").parse()?,
            ber_sim: c.parse(r, "ber_sim")?,
            ci95: c.parse(r, "ci95")?,
            bits: c.parse(r, "bits")?,
            errors: c.parse(r, "errors")?,
            ber_analytic: c.opt(r, "ber_analytic")?,
            flagged: c.parse(r, "flagged")?,
        })
    })
}

pub fn read_analyze(input: impl Read) -> Result<Vec<AnalyzeRecord>> {
    read_table(input, &ANALYZE_COLUMNS, |c, r| {
        Ok(AnalyzeRecord {
            ebn0_db: c.parse(r, "ebn0_db")?,
            ber_1a: c.parse(r, "ber_1a")?,
            ber_1b: c.parse(r, "ber_1b")?,
            ber_2b: c.parse(r, "ber_2b")?,
            ber_e2e: c.parse(r, "ber_e2e")?,
            throughput_s2: c.parse(r, "throughput_s2")?,
            throughput_s3: c.parse(r, "throughput_s3")?,
            gamma_t: c.parse(r, "gamma_t")?,
            gamma_f: c.parse(r, "gamma_f")?,
        })
    })
}

pub fn read_compare(input: impl Read) -> Result<Vec<CompareRecord>> {
    read_table(input, &COMPARE_COLUMNS, |c, r| {
        Ok(CompareRecord {
            scheme: c.raw(r, "scheme").parse()?,
            ebn0_db: c.parse(r, "ebn0_db")?,
            metric: c.raw(r, "metric").to_string(),
            value: c.parse(r, "value")?,
        })
    })
}
