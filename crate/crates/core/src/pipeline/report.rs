//! Per-run records, aggregates and their JSON / CSV serializations.
//!
//! Output is a pure function of the inputs: no timestamps, stable ordering,
//! shortest round-trip float formatting.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One (method, p, delta, repeat) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    /// Requested number of features.
    pub p: usize,
    /// Mixture coefficient; `None` for baselines.
    pub delta: Option<f64>,
    pub repeat: usize,
    pub split_seed: u64,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    /// Kernel weights (KLR-FS only).
    pub weights: Option<Vec<f64>>,
    pub weights_decreasing: Option<bool>,
    /// Alignment of the combined kernel with the target (KLR-FS only).
    pub kta: Option<f64>,
    /// Kernel-PCA components behind the latent target (KLR-FS only).
    pub kpca_components: Option<usize>,
    pub c: Option<f64>,
    /// Bandwidth of the baseline RBF classifier.
    pub gamma: Option<f64>,
    pub cv_auc: Option<f64>,
    pub auc: Option<f64>,
    pub red: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub(crate) fn empty(method: &str, p: usize, delta: Option<f64>, repeat: usize, split_seed: u64) -> Self {
        Self {
            method: method.to_string(),
            p,
            delta,
            repeat,
            split_seed,
            selected: Vec::new(),
            selected_names: Vec::new(),
            weights: None,
            weights_decreasing: None,
            kta: None,
            kpca_components: None,
            c: None,
            gamma: None,
            cv_auc: None,
            auc: None,
            red: None,
            error: None,
        }
    }

    pub(crate) fn failed(mut self, err: &Error) -> Self {
        self.error = Some(err.to_string());
        self
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Mean and sample standard deviation over repeats of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub p: usize,
    pub delta: Option<f64>,
    pub n_runs: usize,
    pub n_failed: usize,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
    pub red_mean: Option<f64>,
    pub red_std: Option<f64>,
}

/// Mean and standard deviation with `n - 1` in the denominator; the
/// deviation is `0` for a single value.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

/// Groups records by (method, p, delta) in first-appearance order.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, usize, Option<u64>)> = Vec::new();
    for r in records {
        let key = (r.method.clone(), r.p, r.delta.map(f64::to_bits));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, p, delta_bits)| {
            let cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.method == method && r.p == p && r.delta.map(f64::to_bits) == delta_bits)
                .collect();
            let aucs: Vec<f64> = cell.iter().filter_map(|r| r.auc).collect();
            let reds: Vec<f64> = cell.iter().filter_map(|r| r.red).collect();
            let auc = mean_std(&aucs);
            let red = mean_std(&reds);
            Aggregate {
                method,
                p,
                delta: delta_bits.map(f64::from_bits),
                n_runs: cell.len(),
                n_failed: cell.iter().filter(|r| !r.succeeded()).count(),
                auc_mean: auc.map(|a| a.0),
                auc_std: auc.map(|a| a.1),
                red_mean: red.map(|a| a.0),
                red_std: red.map(|a| a.1),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    /// `evaluate`, `sweep-delta` or `benchmark`.
    pub kind: String,
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn new(kind: &str, config: &ExperimentConfig, records: Vec<RunRecord>) -> Self {
        let aggregates = aggregate(&records);
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            config: config.clone(),
            records,
            aggregates,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `method,p,delta,repeat,auc,red`; missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("method,p,delta,repeat,auc,red\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.method,
                r.p,
                opt(r.delta),
                r.repeat,
                opt(r.auc),
                opt(r.red)
            );
        }
        out
    }

    /// Human-readable aggregate table.
    pub fn summary_table(&self) -> String {
        let fmt = |m: Option<f64>, s: Option<f64>| match (m, s) {
            (Some(m), Some(s)) => format!("{m:.4} +/- {s:.4}"),
            _ => "n/a".to_string(),
        };
        let mut out = format!(
            "{:<10} {:>4} {:>6} {:>20} {:>20} {:>7}\n",
            "method", "p", "delta", "auc", "red", "failed"
        );
        for a in &self.aggregates {
            let delta = a.delta.map(|d| format!("{d}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<10} {:>4} {:>6} {:>20} {:>20} {:>7}",
                a.method,
                a.p,
                delta,
                fmt(a.auc_mean, a.auc_std),
                fmt(a.red_mean, a.red_std),
                a.n_failed
            );
        }
        out
    }

    /// Writes `report.json` and `records.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("report.json"), &self.to_json())?;
        write_file(&dir.join("records.csv"), &self.to_csv())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
