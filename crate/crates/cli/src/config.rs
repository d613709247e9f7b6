//! Experiment files.
//!
//! A config is a flat INI-style text file: `[section]` headers, `key = value`
//! lines, and `#` or `;` comments. One file describes one scenario:
//!
//! ```ini
//! [scenario]
//! scheme = timemux2
//! beta = 25
//! ebn0_db = 0:25:5
//!
//! [hop1_a]
//! avg_gain_1 = 0.7
//! avg_gain_2 = 0.89
//! delay = 3
//!
//! [run]
//! min_errors = 100
//! master_seed = 1
//! ```
//!
//! Every hop section also accepts `fading = rayleigh | static`. Missing hop
//! sections default to unit-gain AWGN links.

use dcsk_core::analysis::SpecialCase;
use dcsk_core::montecarlo::{check_grid, ErrorTarget, StoppingRule};
use dcsk_core::{Fading, Scenario, SchemeId, TwoRayLink};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: [{section}] {key}: {reason}")]
    Field {
        line: usize,
        section: String,
        key: String,
        reason: String,
    },
    #[error("[{section}] {key}: required but missing")]
    Missing { section: String, key: String },
    #[error("invalid scenario: {0}")]
    Scenario(#[from] dcsk_core::Error),
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but untyped `[section] key = value` table.
#[derive(Debug, Default)]
struct Table {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const KNOWN: &[(&str, &[&str])] = &[
    (
        "scenario",
        &[
            "scheme",
            "beta",
            "ebn0_db",
            "genie_remove_strong_isi",
            "include_term_c",
            "special_case",
            "pnc_threshold",
            "anc_threshold",
            "anc_packet_bits",
            "two_sided",
        ],
    ),
    ("hop1_a", &["avg_gain_1", "avg_gain_2", "delay", "fading"]),
    ("hop1_b", &["avg_gain_1", "avg_gain_2", "delay", "fading"]),
    ("hop2_b", &["avg_gain_1", "avg_gain_2", "delay", "fading"]),
    (
        "run",
        &["min_errors", "max_bits", "master_seed", "output", "target"],
    ),
];

impl Table {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut table = Table::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim().to_ascii_lowercase();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Syntax {
                        line,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if table.sections.contains_key(&name) {
                    return Err(ConfigError::Syntax {
                        line,
                        message: format!("section [{name}] appears twice"),
                    });
                }
                table.sections.insert(name.clone(), BTreeMap::new());
                section = Some(name);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            let Some(sec) = &section else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("`{key}` appears before any [section]"),
                });
            };
            let allowed = KNOWN
                .iter()
                .find(|(s, _)| s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            let field = |reason: String| ConfigError::Field {
                line,
                section: sec.clone(),
                key: key.clone(),
                reason,
            };
            if !allowed.contains(&key.as_str()) {
                return Err(field("unknown key".into()));
            }
            let entries = table.sections.get_mut(sec).expect("section inserted");
            if entries.contains_key(&key) {
                return Err(field("key appears twice".into()));
            }
            entries.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(table)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Typed lookup; `None` when the key is absent.
    fn get<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .map_err(|reason| ConfigError::Field {
                    line: e.line,
                    section: section.into(),
                    key: key.into(),
                    reason,
                }),
        }
    }

    fn require<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.get(section, key, parse)?
            .ok_or_else(|| ConfigError::Missing {
                section: section.into(),
                key: key.into(),
            })
    }

    /// Attaches the line of `section.key` (or the first line of the section)
    /// to a validation failure.
    fn invalid(&self, section: &str, key: &str, reason: String) -> ConfigError {
        let line = self
            .entry(section, key)
            .or_else(|| self.sections.get(section)?.values().next())
            .map_or(0, |e| e.line);
        ConfigError::Field {
            line,
            section: section.into(),
            key: key.into(),
            reason,
        }
    }

    fn field_error(&self, section: &str, e: dcsk_core::Error) -> ConfigError {
        match &e {
            dcsk_core::Error::InvalidParameter { field, .. } => {
                self.invalid(section, field, e.to_string())
            }
            _ => ConfigError::Scenario(e),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_from_str<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| format!("cannot parse `{s}`: {e}"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    s.parse::<SchemeId>().map_err(|e| e.to_string())
}

fn parse_fading(s: &str) -> Result<Fading, String> {
    match s.to_ascii_lowercase().as_str() {
        "rayleigh" => Ok(Fading::Rayleigh),
        "static" | "awgn" => Ok(Fading::Static),
        _ => Err(format!("expected rayleigh or static, got `{s}`")),
    }
}

fn parse_target(s: &str) -> Result<ErrorTarget, String> {
    match s.to_ascii_lowercase().as_str() {
        "end_to_end" | "e2e" => Ok(ErrorTarget::EndToEnd),
        "relay" => Ok(ErrorTarget::Relay),
        _ => Err(format!("expected end_to_end or relay, got `{s}`")),
    }
}

fn parse_special(s: &str) -> Result<Option<SpecialCase>, String> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(None),
        "user_a_low" => Ok(Some(SpecialCase::UserALow)),
        "user_b_low" => Ok(Some(SpecialCase::UserBLow)),
        "all_awgn" => Ok(Some(SpecialCase::AllAwgn)),
        _ => Err(format!(
            "expected none, user_a_low, user_b_low or all_awgn, got `{s}`"
        )),
    }
}

/// Parses `start:stop:step` (inclusive of `stop`) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        let (a, b, step): (f64, f64, f64) = (
            parse_from_str(a)?,
            parse_from_str(b)?,
            parse_from_str(step)?,
        );
        if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err(format!(
                "grid `{s}` needs start <= stop and a positive step"
            ));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| a + i as f64 * step).collect()
    } else {
        s.split(',')
            .map(|v| parse_from_str::<f64>(v.trim()))
            .collect::<Result<Vec<_>, _>>()?
    };
    check_grid(&grid).map_err(|e| e.to_string())?;
    Ok(grid)
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: Vec<f64>,
    pub rule: StoppingRule,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub target: ErrorTarget,
    pub include_term_c: bool,
    pub special_case: Option<SpecialCase>,
    /// SHA-256 of the file contents, hex encoded.
    pub source_hash: String,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        use sha2::{Digest, Sha256};
        let t = Table::parse(text)?;
        let s = "scenario";
        let scheme = t.require(s, "scheme", parse_scheme)?;
        let beta = t.require(s, "beta", parse_from_str::<usize>)?;
        if beta < Scenario::MIN_BETA {
            return Err(t.invalid(
                s,
                "beta",
                format!("must be at least {}, got {beta}", Scenario::MIN_BETA),
            ));
        }
        let grid = t.require(s, "ebn0_db", parse_grid)?;

        let mut links = [TwoRayLink::awgn(); 3];
        for (link, name) in links.iter_mut().zip(["hop1_a", "hop1_b", "hop2_b"]) {
            if !t.has_section(name) {
                continue;
            }
            let fading = t
                .get(name, "fading", parse_fading)?
                .unwrap_or(Fading::Rayleigh);
            let gain_2_default = if fading == Fading::Static {
                Some(0.0)
            } else {
                None
            };
            let g1 = t.require(name, "avg_gain_1", parse_from_str::<f64>)?;
            let g2 = match (
                t.get(name, "avg_gain_2", parse_from_str::<f64>)?,
                gain_2_default,
            ) {
                (Some(g), _) | (None, Some(g)) => g,
                (None, None) => t.require(name, "avg_gain_2", parse_from_str::<f64>)?,
            };
            let delay = t.get(name, "delay", parse_from_str::<usize>)?.unwrap_or(0);
            *link = TwoRayLink {
                avg_gain_1: g1,
                avg_gain_2: g2,
                delay,
                fading,
            };
            link.validate(beta).map_err(|e| t.field_error(name, e))?;
        }

        let special_case = t.get(s, "special_case", parse_special)?.flatten();
        let [mut hop1_a, mut hop1_b, mut hop2_b] = links;
        let awgn = TwoRayLink::awgn();
        match special_case {
            Some(SpecialCase::UserALow) => hop1_a = awgn,
            Some(SpecialCase::UserBLow) => (hop1_b, hop2_b) = (awgn, awgn),
            Some(SpecialCase::AllAwgn) => (hop1_a, hop1_b, hop2_b) = (awgn, awgn, awgn),
            None => {}
        }

        let mut scenario = Scenario::new(scheme, beta, hop1_a, hop1_b, hop2_b);
        scenario.ebn0_db = grid[0];
        if let Some(v) = t.get(s, "genie_remove_strong_isi", parse_bool)? {
            scenario.genie_remove_strong_isi = v;
        }
        if let Some(v) = t.get(s, "pnc_threshold", parse_from_str::<f64>)? {
            scenario.pnc_threshold = v;
        }
        if let Some(v) = t.get(s, "anc_threshold", parse_from_str::<f64>)? {
            scenario.anc_threshold = v;
        }
        if let Some(v) = t.get(s, "anc_packet_bits", parse_from_str::<usize>)? {
            scenario.anc_packet_bits = v;
        }
        if let Some(v) = t.get(s, "two_sided", parse_bool)? {
            scenario.two_sided = v;
        }
        scenario.validate().map_err(|e| t.field_error(s, e))?;

        let default_rule = StoppingRule::default();
        let rule = StoppingRule {
            min_errors: t
                .get("run", "min_errors", parse_from_str::<u64>)?
                .unwrap_or(default_rule.min_errors),
            max_bits: t
                .get("run", "max_bits", parse_from_str::<u64>)?
                .unwrap_or(default_rule.max_bits),
        };
        rule.validate()
            .map_err(|e| t.invalid("run", "max_bits", e.to_string()))?;

        Ok(ExperimentConfig {
            scenario,
            grid,
            rule,
            master_seed: t
                .get("run", "master_seed", parse_from_str::<u64>)?
                .unwrap_or(0),
            output: t.get("run", "output", |v| Ok(PathBuf::from(v)))?,
            target: t
                .get("run", "target", parse_target)?
                .unwrap_or(ErrorTarget::EndToEnd),
            include_term_c: t.get(s, "include_term_c", parse_bool)?.unwrap_or(false),
            special_case,
            source_hash: hex(&Sha256::digest(text.as_bytes())),
        })
    }

    /// Replaces the scheme, re-checking scheme-specific options.
    pub fn with_scheme(mut self, scheme: SchemeId) -> Result<Self, ConfigError> {
        self.scenario.scheme = scheme;
        if scheme != SchemeId::Pnc1 {
            self.scenario.genie_remove_strong_isi = false;
        }
        self.scenario.validate()?;
        Ok(self)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
