//! Versioned run reports.
//!
//! A [`Report`] embeds the full [`RunConfig`] of a run, a list of
//! [`Row`]s (data points and tolerance gates, one per grid point and
//! metric) and a free-form `results` object. It serializes to JSON under
//! the schema tag [`SCHEMA`] or to CSV with the columns
//! `metric,grid_value,estimate,stderr,gate,pass`.
//!
//! Apart from the `timestamp` field the JSON text is a pure function of
//! the configuration: floating-point values are printed in shortest
//! round-trip form and every aggregate is reduced in a fixed order.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Schema tag of every report.
pub const SCHEMA: &str = "iterint-report/1";

/// The configuration a report was produced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Subcommand path such as `couple` or `phase charfn`.
    pub subcommand: String,
    /// Requested output file, if any.
    pub out: Option<String>,
    /// `json` or `csv`.
    pub format: String,
    /// Subcommand parameters (sizes, grids, seeds, selectors).
    pub params: Value,
}

/// A data point or gate of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub metric: String,
    pub grid_value: Option<f64>,
    pub estimate: f64,
    pub stderr: Option<f64>,
    /// Human-readable acceptance condition; `None` for plain data rows.
    pub gate: Option<String>,
    pub pass: bool,
}

impl Row {
    /// A data row without a gate.
    pub fn data(metric: &str, grid_value: Option<f64>, estimate: f64, stderr: Option<f64>) -> Self {
        Row { metric: metric.into(), grid_value, estimate, stderr, gate: None, pass: true }
    }

    /// A gated row.
    pub fn gate(metric: &str, grid_value: Option<f64>, estimate: f64, stderr: Option<f64>, gate: String, pass: bool) -> Self {
        Row { metric: metric.into(), grid_value, estimate, stderr, gate: Some(gate), pass }
    }
}

/// A complete run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: RunConfig,
    pub rows: Vec<Row>,
    pub results: Value,
    /// Seconds since the Unix epoch at creation; excluded from comparisons.
    pub timestamp: u64,
}

impl Report {
    /// A report stamped with the current time.
    pub fn new(config: RunConfig, rows: Vec<Row>, results: Value) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report { schema: SCHEMA.into(), config, rows, results, timestamp }
    }

    /// Whether any gate failed.
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| !r.pass)
    }

    /// Gated rows only.
    pub fn gates(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.gate.is_some())
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// CSV with one row per data point or gate.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["metric", "grid_value", "estimate", "stderr", "gate", "pass"])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.metric.clone(),
                opt(r.grid_value),
                format!("{:?}", r.estimate),
                opt(r.stderr),
                r.gate.clone().unwrap_or_default(),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Renders in the configured format.
    pub fn render(&self) -> Result<Vec<u8>> {
        if self.config.format == "csv" {
            let mut buf = Vec::new();
            self.write_csv(&mut buf)?;
            Ok(buf)
        } else {
            Ok(self.to_json()?.into_bytes())
        }
    }
}

/// Parses report JSON and drops the `timestamp` field.
pub fn without_timestamp(json: &str) -> Result<Value> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timestamp");
    }
    Ok(v)
}
