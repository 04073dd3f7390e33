//! Verdicts, tables and the on-disk report layout.
//!
//! `report.json` depends only on the configuration and seed; the wall-clock
//! timestamp and paths go to `run_info.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured ≤ threshold`
    AtMost,
    /// `measured ≥ threshold`
    AtLeast,
    /// `measured == threshold`
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub invariant: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Verdict {
    pub fn at_most(invariant: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(invariant, measured, threshold, Comparison::AtMost, measured <= threshold)
    }

    pub fn at_least(invariant: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(invariant, measured, threshold, Comparison::AtLeast, measured >= threshold)
    }

    /// Counts of offending cases: passes when `count == 0`.
    pub fn none_of(invariant: impl Into<String>, count: usize) -> Self {
        Self::new(invariant, count as f64, 0.0, Comparison::Equal, count == 0)
    }

    /// A boolean property, recorded as 1 (holds) or 0.
    pub fn holds(invariant: impl Into<String>, ok: bool) -> Self {
        Self::new(invariant, if ok { 1.0 } else { 0.0 }, 1.0, Comparison::Equal, ok)
    }

    fn new(invariant: impl Into<String>, measured: f64, threshold: f64, comparison: Comparison, pass: bool) -> Self {
        Self {
            invariant: invariant.into(),
            measured,
            threshold,
            comparison,
            pass: pass && !measured.is_nan(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// A CSV table: header plus numeric or text rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_number(*v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Shortest round-trip representation.
pub fn fmt_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Everything an experiment produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    pub plotdata: Vec<Table>,
    pub details: serde_json::Value,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct TableEntry<'a> {
    name: &'a str,
    file: String,
    csv: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    config_hash: String,
    seed: u64,
    experiment: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    versions: Versions,
}

#[derive(Serialize)]
struct Versions {
    whlab: &'static str,
    report_format: u32,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    metadata: Metadata<'a>,
    pass: bool,
    verdicts: &'a [Verdict],
    notes: &'a [String],
    tables: Vec<TableEntry<'a>>,
    plotdata: Vec<String>,
    details: &'a serde_json::Value,
}

/// SHA-256 of the configuration in canonical form (sorted keys, effective seed).
pub fn config_hash(config: &ExperimentConfig) -> String {
    let value = serde_json::to_value(config).expect("config serialises");
    let canonical = serde_json::to_string(&value).expect("value serialises");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn all_pass(outcome: &Outcome) -> bool {
    !outcome.verdicts.is_empty() && outcome.verdicts.iter().all(|v| v.pass)
}

/// The bytes of `report.json`.
pub fn render_report(config: &ExperimentConfig, outcome: &Outcome) -> String {
    let report = ReportJson {
        metadata: Metadata {
            config_hash: config_hash(config),
            seed: config.seed,
            experiment: config.experiment.kind(),
            name: config.name.as_deref(),
            versions: Versions {
                whlab: env!("CARGO_PKG_VERSION"),
                report_format: 1,
            },
        },
        pass: all_pass(outcome),
        verdicts: &outcome.verdicts,
        notes: &outcome.notes,
        tables: outcome
            .tables
            .iter()
            .map(|t| TableEntry {
                name: &t.name,
                file: format!("tables/{}.csv", t.name),
                csv: t.to_csv(),
            })
            .collect(),
        plotdata: outcome.plotdata.iter().map(|t| format!("plotdata/{}.csv", t.name)).collect(),
        details: &outcome.details,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serialises");
    s.push('\n');
    s
}

/// Writes `report.json`, `tables/`, `plotdata/` and `run_info.json` into `dir`.
pub fn write_report(dir: &Path, config: &ExperimentConfig, outcome: &Outcome, run_info: &serde_json::Value) -> std::io::Result<()> {
    fs::create_dir_all(dir.join("tables"))?;
    fs::create_dir_all(dir.join("plotdata"))?;
    for t in &outcome.tables {
        fs::write(dir.join("tables").join(format!("{}.csv", t.name)), t.to_csv())?;
    }
    for t in &outcome.plotdata {
        fs::write(dir.join("plotdata").join(format!("{}.csv", t.name)), t.to_csv())?;
    }
    fs::write(dir.join("report.json"), render_report(config, outcome))?;
    let mut info = serde_json::to_string_pretty(run_info).expect("run info serialises");
    info.push('\n');
    fs::write(dir.join("run_info.json"), info)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_constructors() {
        assert!(Verdict::at_most("x", 1.0, 1.0).pass);
        assert!(!Verdict::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Verdict::at_least("x", 9.0, 10.0).pass);
        assert!(Verdict::none_of("x", 0).pass && !Verdict::none_of("x", 2).pass);
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push_numbers(&[0.1, -2.5e-12]);
        let csv = t.to_csv();
        assert_eq!(csv, "a,b\n1e-1,-2.5e-12\n");
        let mut r = csv::Reader::from_reader(csv.as_bytes());
        let row: (f64, f64) = r.deserialize().next().unwrap().unwrap();
        assert_eq!(row, (0.1, -2.5e-12));
    }

    #[test]
    fn empty_outcome_does_not_pass() {
        assert!(!all_pass(&Outcome::default()));
    }
}
