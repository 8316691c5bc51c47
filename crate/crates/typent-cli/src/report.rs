//! Machine-readable comparison reports: a flat CSV with one row per
//! (sweep point, engine) and a JSON document carrying the effective config,
//! its hash, the tolerance checks, and per-engine timings.

use std::path::Path;

use serde::Serialize;

use crate::config::{EngineKind, ExperimentConfig, ModelKind};
use crate::CliError;

pub const CSV_HEADER: [&str; 15] = [
    "model",
    "d",
    "L",
    "L_A",
    "k",
    "q",
    "engine",
    "purity_mean",
    "purity_stderr",
    "purity_var",
    "s2_of_mean",
    "mean_s2",
    "bound",
    "samples",
    "seed",
];

/// Full double precision: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Clone, Debug, Serialize)]
pub struct EngineRow {
    pub engine: EngineKind,
    pub purity_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity_var: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity_var_stderr: Option<f64>,
    pub s2_of_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_s2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2_stderr: Option<f64>,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub k: u32,
    pub partition: Vec<usize>,
    pub l_a: usize,
    pub boundary_edges: usize,
    /// Boundary fraction |dA| / |E| of the initial partition.
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<&'static str>,
    pub rows: Vec<EngineRow>,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub points: Vec<PointReport>,
    /// Least-squares slope of mean S2 against |dA| over the partition sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_law_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_check: Option<CheckResult>,
    pub all_pass: bool,
}

impl ExperimentReport {
    pub fn collect_failures(&self) -> Vec<&CheckResult> {
        self.points
            .iter()
            .flat_map(|p| p.checks.iter())
            .chain(self.plateau_check.iter())
            .filter(|c| !c.pass)
            .collect()
    }

    fn csv_record(&self, model: ModelKind, point: &PointReport, row: &EngineRow) -> Vec<String> {
        let graph = &self.config.graph;
        vec![
            model.as_str().to_string(),
            graph.d.to_string(),
            graph.l.map(|l| l.to_string()).unwrap_or_default(),
            point.l_a.to_string(),
            point.k.to_string(),
            fmt_f64(point.q),
            row.engine.as_str().to_string(),
            fmt_f64(row.purity_mean),
            fmt_opt(row.purity_stderr),
            fmt_opt(row.purity_var),
            fmt_f64(row.s2_of_mean),
            fmt_opt(row.mean_s2),
            fmt_f64(row.bound),
            row.mc_samples.map(|s| s.to_string()).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }

    pub fn to_csv_string(&self) -> Result<String, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(CSV_HEADER)
            .map_err(|e| CliError::Resource(format!("csv write: {e}")))?;
        for point in &self.points {
            for row in &point.rows {
                writer
                    .write_record(self.csv_record(self.config.model, point, row))
                    .map_err(|e| CliError::Resource(format!("csv write: {e}")))?;
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Resource(format!("csv flush: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Resource(format!("csv encoding: {e}")))
    }

    pub fn to_json_string(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Resource(format!("json write: {e}")))
    }

    pub fn write_files(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        std::fs::write(dir.join("results.csv"), self.to_csv_string()?)
            .map_err(|e| CliError::Resource(format!("write results.csv: {e}")))?;
        std::fs::write(dir.join("report.json"), self.to_json_string()?)
            .map_err(|e| CliError::Resource(format!("write report.json: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.8), "8.0000000000000004e-1");
        assert_eq!(fmt_f64(1.0 / 6.0), "1.6666666666666666e-1");
        let text = fmt_f64(std::f64::consts::PI);
        let parsed: f64 = text.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }

    #[test]
    fn header_is_bit_exact() {
        assert_eq!(
            CSV_HEADER.join(","),
            "model,d,L,L_A,k,q,engine,purity_mean,purity_stderr,purity_var,s2_of_mean,mean_s2,bound,samples,seed"
        );
    }
}
