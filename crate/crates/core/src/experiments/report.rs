//! Experiment reports: a JSON summary plus a CSV of the primary curve.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// The fully resolved configuration of the run.
    pub parameters: serde_json::Value,
    pub series: BTreeMap<String, Vec<f64>>,
    pub verdict: bool,
    /// Margins by which each checked quantity met or missed its threshold.
    pub slack: BTreeMap<String, f64>,
    /// Names of the series written to the CSV, in column order.
    #[serde(skip)]
    pub primary: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, parameters: serde_json::Value) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            parameters,
            series: BTreeMap::new(),
            verdict: true,
            slack: BTreeMap::new(),
            primary: Vec::new(),
        }
    }

    pub fn with_series(mut self, name: &str, values: Vec<f64>) -> Self {
        self.series.insert(name.to_string(), values);
        self
    }

    pub fn with_slack(mut self, name: &str, value: f64) -> Self {
        self.slack.insert(name.to_string(), value);
        self
    }

    pub fn with_primary(mut self, columns: &[&str]) -> Self {
        self.primary = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn with_verdict(mut self, verdict: bool) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the primary series as CSV columns.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let columns: Vec<&Vec<f64>> = self
            .primary
            .iter()
            .map(|name| {
                self.series
                    .get(name)
                    .ok_or_else(|| param("primary", format!("no series named `{name}`")))
            })
            .collect::<Result<_>>()?;
        writeln!(out, "{}", self.primary.join(","))?;
        let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
        for i in 0..rows {
            let row: Vec<String> = columns
                .iter()
                .map(|c| c.get(i).map(|v| format!("{v:e}")).unwrap_or_default())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Writes `report.json` and `<experiment>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        let file = std::fs::File::create(dir.join(format!("{}.csv", self.experiment)))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
