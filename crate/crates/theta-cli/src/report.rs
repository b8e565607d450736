//! The report document and its JSON and CSV renderings.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use theta_core::verify::{CheckRecord, OperatorTable};

use crate::config::{Format, RunConfig};

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<OperatorTable>,
    pub summary: Summary,
}

impl ReportDocument {
    pub fn new(command: &str, config: RunConfig, mut records: Vec<CheckRecord>, tables: Vec<OperatorTable>, timings: bool) -> Self {
        if !timings {
            records.iter_mut().for_each(|r| r.elapsed_ms = None);
        }
        let passed = records.iter().filter(|r| r.pass).count();
        let summary = Summary { total: records.len(), passed, failed: records.len() - passed };
        ReportDocument { schema_version: SCHEMA_VERSION, command: command.into(), config, records, tables, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv if !self.tables.is_empty() => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["case", "row", "column", "value"])?;
                for t in &self.tables {
                    for (i, row) in t.rows.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            w.write_record([t.case.as_str(), &t.labels[i], &t.labels[j], v])?;
                        }
                    }
                }
                w.flush()?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["name", "anchor", "computed", "expected", "pass", "elapsed_ms"])?;
                for r in &self.records {
                    let ms = r.elapsed_ms.map(|m| m.to_string()).unwrap_or_default();
                    w.write_record([&r.name, &r.anchor, &r.computed, &r.expected, &r.pass.to_string(), &ms])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}
