//! Comma-separated result files and the run manifest.
//!
//! * `summary.csv`: approach, mean rate, normalized rate, 5% outage rate
//! * `rates.csv`: per-realization rates, one column per approach
//! * `ratios.csv`: per-realization rate over the exhaustive rate
//! * `cdf.csv`: empirical CDF at shared thresholds
//! * `loss.csv`: per-epoch training MSE of every network
//! * `manifest.txt`: code version, approaches, seeds and the full config

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::experiment::{Approach, TrainedApproach};
use super::metrics::Metrics;
use crate::error::{parse, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const RATIOS_FILE: &str = "ratios.csv";
pub const CDF_FILE: &str = "cdf.csv";
pub const LOSS_FILE: &str = "loss.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Shortest round-trip form, always with a decimal point or exponent.
pub fn fmt_f64(v: f64) -> String {
    let s = v.to_string();
    if v.is_finite() && !s.contains(['.', 'e']) {
        s + ".0"
    } else {
        s
    }
}

fn header(first: &str, metrics: &Metrics) -> String {
    let mut h = first.to_string();
    for m in &metrics.approaches {
        h.push(',');
        h.push_str(m.approach.name());
    }
    h.push('\n');
    h
}

fn columns(first: &str, keys: &[String], metrics: &Metrics, col: impl Fn(usize) -> Vec<f64>) -> String {
    let mut out = header(first, metrics);
    let cols: Vec<Vec<f64>> = (0..metrics.approaches.len()).map(col).collect();
    for (row, key) in keys.iter().enumerate() {
        out.push_str(key);
        for c in &cols {
            out.push(',');
            out.push_str(&fmt_f64(c[row]));
        }
        out.push('\n');
    }
    out
}

pub fn summary_csv(metrics: &Metrics) -> String {
    let mut out = String::from("approach,mean_rate,normalized_rate,outage_5_rate\n");
    for m in &metrics.approaches {
        let _ = writeln!(out, "{},{},{},{}", m.approach, fmt_f64(m.mean_rate), fmt_f64(m.normalized), fmt_f64(m.outage_5));
    }
    out
}

pub fn rates_csv(metrics: &Metrics) -> String {
    let keys: Vec<String> = metrics.indices.iter().map(u64::to_string).collect();
    columns("index", &keys, metrics, |a| metrics.approaches[a].rates.clone())
}

pub fn ratios_csv(metrics: &Metrics) -> String {
    let keys: Vec<String> = metrics.indices.iter().map(u64::to_string).collect();
    columns("index", &keys, metrics, |a| metrics.approaches[a].ratios.clone())
}

pub fn cdf_csv(metrics: &Metrics) -> String {
    let keys: Vec<String> = metrics.thresholds.iter().map(|&t| fmt_f64(t)).collect();
    columns("threshold", &keys, metrics, |a| metrics.approaches[a].cdf.clone())
}

pub fn loss_csv(trained: &[TrainedApproach]) -> String {
    let mut out = String::from("approach,network,epoch,mse\n");
    for t in trained {
        for (p, curve) in t.predictors.iter().zip(&t.loss_curves) {
            for (e, mse) in curve.iter().enumerate() {
                let _ = writeln!(out, "{},{},{e},{}", t.approach, p.kind, fmt_f64(*mse));
            }
        }
    }
    out
}

pub fn manifest(config: &ExperimentConfig, approaches: &[Approach]) -> String {
    let names: Vec<&str> = approaches.iter().map(|a| a.name()).collect();
    format!(
        "# {} {}\n# approaches={}\n# seed={} train_seed={}\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        names.join(","),
        config.seed,
        config.hyper.seed,
        config.to_text()
    )
}

/// Writes every result file into `dir` (created if missing) and returns the
/// paths written.
pub fn emit_results(dir: &Path, config: &ExperimentConfig, metrics: &Metrics, trained: &[TrainedApproach]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let approaches: Vec<Approach> = metrics.approaches.iter().map(|m| m.approach).collect();
    let files = [
        (SUMMARY_FILE, summary_csv(metrics)),
        (RATES_FILE, rates_csv(metrics)),
        (RATIOS_FILE, ratios_csv(metrics)),
        (CDF_FILE, cdf_csv(metrics)),
        (LOSS_FILE, loss_csv(trained)),
        (MANIFEST_FILE, manifest(config, &approaches)),
    ];
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

/// Reads `rates.csv` back into sample indices and per-approach columns.
pub fn read_rates(text: &str) -> Result<(Vec<u64>, Vec<(Approach, Vec<f64>)>)> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| parse("empty rates file"))?;
    let mut names = head.split(',');
    if names.next() != Some("index") {
        return Err(parse("rates file must start with an `index` column"));
    }
    let approaches = names.map(|n| n.parse::<Approach>()).collect::<Result<Vec<_>>>()?;
    let mut indices = Vec::new();
    let mut cols = vec![Vec::new(); approaches.len()];
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut fields = line.split(',');
        let idx = fields.next().unwrap_or_default();
        indices.push(idx.parse().map_err(|_| parse(format!("bad index `{idx}`")))?);
        let values: Vec<&str> = fields.collect();
        if values.len() != approaches.len() {
            return Err(parse(format!("row {idx} has {} rates, expected {}", values.len(), approaches.len())));
        }
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v.parse().map_err(|_| parse(format!("bad rate `{v}`")))?);
        }
    }
    Ok((indices, approaches.into_iter().zip(cols).collect()))
}
