//! One-parameter sweeps: points run in parallel, results are collected in
//! value order and written once.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{set_numeric, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::experiments::{run_experiment, ResultRecord, Swept};
use crate::output::{num, write_json, write_tables, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// The point ran but its verification check failed.
    Failed,
    Error,
}

impl PointStatus {
    fn name(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Failed => "failed",
            PointStatus::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub status: PointStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<ResultRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepOutput {
    pub config_hash: String,
    pub path: String,
    pub linked: Vec<String>,
    pub values: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

fn run_point(doc: &serde_json::Value, swept: &Swept) -> SweepPoint {
    let outcome = (|| {
        let mut doc = doc.clone();
        for p in std::iter::once(&swept.path).chain(&swept.linked) {
            set_numeric(&mut doc, p, swept.value)?;
        }
        let cfg = ExperimentConfig::from_value(doc)?;
        run_experiment(&cfg)
    })();
    match outcome {
        Ok(mut out) => {
            out.record.swept = Some(swept.clone());
            let status = if out.failure.is_some() { PointStatus::Failed } else { PointStatus::Ok };
            SweepPoint {
                value: swept.value,
                status,
                exit_code: out.failure.as_ref().map(|_| crate::error::EXIT_VERIFICATION),
                message: out.failure,
                record: Some(out.record),
            }
        }
        Err(e) => {
            log::warn!("sweep point {}: {e}", swept.value);
            SweepPoint {
                value: swept.value,
                status: PointStatus::Error,
                message: Some(e.to_string()),
                exit_code: Some(e.exit_code()),
                record: None,
            }
        }
    }
}

/// Runs `cfg` once per value with `path` (and every linked path) set to it.
pub fn sweep(cfg: &ExperimentConfig, path: &str, linked: &[String], values: &[f64]) -> CliResult<SweepOutput> {
    let mut base = cfg.clone();
    base.sweep = None;
    let doc = serde_json::to_value(&base).expect("config serializes");
    for p in std::iter::once(path).chain(linked.iter().map(String::as_str)) {
        set_numeric(&mut doc.clone(), p, 1.0)?;
    }
    let points = values
        .par_iter()
        .map(|&value| run_point(&doc, &Swept { path: path.to_string(), linked: linked.to_vec(), value }))
        .collect();
    Ok(SweepOutput {
        config_hash: cfg.hash(),
        path: path.to_string(),
        linked: linked.to_vec(),
        values: values.to_vec(),
        points,
    })
}

/// Sweep described by the config's own `sweep` section.
pub fn sweep_from_config(cfg: &ExperimentConfig) -> CliResult<SweepOutput> {
    let s = cfg.sweep.as_ref().ok_or_else(|| CliError::config("/sweep", "the sweep command needs a sweep section"))?;
    sweep(cfg, &s.path, &s.linked, &s.values()?)
}

const METRICS: [&str; 6] =
    ["fidelity", "phase_sensitive_fidelity", "operator_distance", "peak_p_a", "peak_n_photon", "leakage"];

impl SweepOutput {
    /// One row per point: the value, status, headline metrics and every report extra.
    pub fn summary(&self, file: impl Into<String>) -> Table {
        let extras: BTreeSet<&String> = self
            .points
            .iter()
            .filter_map(|p| p.record.as_ref()?.protocol())
            .flat_map(|r| r.extras.keys())
            .collect();
        let mut header = vec!["value", "status"];
        header.extend(METRICS);
        header.extend(extras.iter().map(|s| s.as_str()));
        let mut table = Table::new(file, &header);
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        for p in &self.points {
            let mut row = vec![num(p.value), p.status.name().to_string()];
            match p.record.as_ref().and_then(ResultRecord::protocol) {
                Some(r) => {
                    let peaks = r.peak_populations;
                    row.extend([
                        num(r.fidelity),
                        opt(r.phase_sensitive_fidelity),
                        opt(r.operator_distance),
                        opt(peaks.map(|p| p.p_a)),
                        opt(peaks.map(|p| p.n_photon)),
                        opt(r.leakage),
                    ]);
                    row.extend(extras.iter().map(|k| opt(r.extras.get(*k).copied())));
                }
                None => row.extend(std::iter::repeat_n(String::new(), METRICS.len() + extras.len())),
            }
            table.push(row);
        }
        table
    }

    /// Writes `sweep_<experiment>.json` and `sweep_<experiment>.csv` under `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> CliResult<Vec<PathBuf>> {
        let json = dir.join(format!("sweep_{stem}.json"));
        write_json(&json, self)?;
        let mut paths = vec![json];
        paths.extend(write_tables(dir, &[self.summary(format!("sweep_{stem}.csv"))])?);
        Ok(paths)
    }
}
