//! Run configuration: an optional JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use theta_core::quadric::CaseKind;
use theta_core::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FlavorArg {
    Unramified,
    Ramified,
    Split,
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q: u32,
    pub flavor: FlavorArg,
    /// Valuation of c₀ (of b₀ when split); both classes when absent.
    pub vc0: Option<u8>,
    /// Explicit case names; overrides `flavor` and `vc0`.
    pub cases: Option<Vec<String>>,
    /// Truncation level of the SL₂(O/t^m) averages.
    pub level: i32,
    /// Classical T_m is checked for m up to this.
    pub classical_levels: i32,
    pub char_order: u32,
    pub nmax: u32,
    /// Random pairs per flavor for the representation law.
    pub pairs: usize,
    /// Random samples for the moment-map identities.
    pub samples: usize,
    /// Random presentations for the two theta evaluations.
    pub theta_samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 3,
            flavor: FlavorArg::All,
            vc0: None,
            cases: None,
            level: 2,
            classical_levels: 2,
            char_order: 4,
            nmax: 4,
            pairs: 20,
            samples: 50,
            theta_samples: 12,
            seed: 7,
            workers: 1,
            out: None,
            format: Format::Json,
        }
    }
}

/// Where a value came from, for error messages.
pub struct Source {
    pub path: PathBuf,
    pub text: String,
}

impl Source {
    fn line_of(&self, key: &str) -> Option<usize> {
        let needle = format!("\"{key}\"");
        self.text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
    }
}

pub fn load(path: &Path) -> Result<(RunConfig, Source)> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
    Ok((cfg, Source { path: path.to_path_buf(), text }))
}

impl RunConfig {
    /// Checks every field against the preconditions of the suites. Errors
    /// name the file line of the offending key when it came from a file.
    pub fn validate(&self, source: Option<&Source>, overridden: &[&str]) -> Result<()> {
        let fail = |key: &str, msg: String| -> anyhow::Error {
            let flag = key.replace('_', "-");
            match source.filter(|_| !overridden.contains(&key)).and_then(|s| s.line_of(key).map(|l| (s, l))) {
                Some((s, line)) => anyhow!("{}:{line}: {key}: {msg}", s.path.display()),
                None => anyhow!("--{flag}: {msg}"),
            }
        };
        if self.q % 2 == 0 || Field::of_order(self.q).is_err() {
            return Err(fail("q", format!("{} is not an odd prime power", self.q)));
        }
        if let Some(v) = self.vc0 {
            if v > 1 {
                return Err(fail("vc0", format!("valuation class must be 0 or 1, got {v}")));
            }
            if v == 0 && self.flavor == FlavorArg::Ramified {
                return Err(fail("vc0", "the ramified case has valuation 1".into()));
            }
        }
        if let Some(cases) = &self.cases {
            for c in cases {
                c.parse::<CaseKind>().map_err(|e| fail("cases", e.to_string()))?;
            }
        }
        if !(1..=3).contains(&self.level) {
            return Err(fail("level", format!("must be 1, 2 or 3, got {}", self.level)));
        }
        if !(1..=2).contains(&self.classical_levels) {
            return Err(fail("classical_levels", format!("must be 1 or 2, got {}", self.classical_levels)));
        }
        if self.char_order == 0 {
            return Err(fail("char_order", "must be positive".into()));
        }
        if self.nmax > 8 {
            return Err(fail("nmax", format!("at most 8, got {}", self.nmax)));
        }
        if self.workers == 0 {
            return Err(fail("workers", "must be positive".into()));
        }
        Ok(())
    }

    /// The dual-number cases selected by `cases`, or else by flavor and vc0.
    pub fn kinds(&self) -> Vec<CaseKind> {
        if let Some(cases) = &self.cases {
            return cases.iter().filter_map(|c| c.parse().ok()).collect();
        }
        CaseKind::ALL
            .into_iter()
            .filter(|k| match self.flavor {
                FlavorArg::All => true,
                FlavorArg::Unramified => k.flavor() == theta_core::Flavor::Unramified,
                FlavorArg::Ramified => k.flavor() == theta_core::Flavor::Ramified,
                FlavorArg::Split => k.flavor() == theta_core::Flavor::Split,
            })
            .filter(|k| self.vc0.map_or(true, |v| k.gamma_val() == v as i32))
            .collect()
    }
}
