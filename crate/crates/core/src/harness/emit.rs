//! Deterministic CSV and manifest output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::NetworkSnapshot;
use crate::clustering::LayerSnapshot;
use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::harness::campaign::{Campaign, RunRecord};
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::SummaryStats;

pub const MANIFEST_FILE: &str = "manifest.json";

/// `%.9g`-style formatting: nine significant digits, no trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn run_csv(record: &RunRecord) -> String {
    let mut out = String::from("episode,latency,return\n");
    for (e, (l, r)) in record.latencies.iter().zip(&record.returns).enumerate() {
        let _ = writeln!(out, "{},{},{}", e, l, fmt_num(*r));
    }
    out
}

/// Inverse of [`run_csv`].
pub fn parse_run_csv(text: &str, config_id: &str, seed: u64) -> Result<RunRecord> {
    let mut lines = text.lines();
    if lines.next() != Some("episode,latency,return") {
        return Err(Error::Input("run CSV must start with `episode,latency,return`".into()));
    }
    let mut record = RunRecord {
        config_id: config_id.to_string(),
        seed,
        latencies: Vec::new(),
        returns: Vec::new(),
    };
    for (row, line) in lines.enumerate() {
        let bad = || Error::Input(format!("malformed run CSV row {}: `{line}`", row + 1));
        let mut fields = line.split(',');
        let (Some(_), Some(latency), Some(ret), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        record.latencies.push(latency.parse().map_err(|_| bad())?);
        record.returns.push(ret.parse().map_err(|_| bad())?);
    }
    Ok(record)
}

/// Reads back a directory written by [`write_campaign`]: the manifest and one
/// record per seed that has a run CSV, in manifest seed order.
pub fn load_campaign(dir: &Path) -> Result<(Manifest, Vec<RunRecord>)> {
    let manifest = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let mut records = Vec::new();
    for &seed in &manifest.seeds {
        let path = dir.join(format!("run_seed{seed}.csv"));
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        records.push(parse_run_csv(&text, &manifest.config.id, seed)?);
    }
    Ok((manifest, records))
}

pub fn summary_csv(stats: Option<&SummaryStats>) -> String {
    let mut out = String::from("episode,mean,std,best\n");
    if let Some(s) = stats {
        for e in 0..s.mean_curve.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e,
                fmt_num(s.mean_curve[e]),
                fmt_num(s.std_curve[e]),
                fmt_num(s.best_curve[e])
            );
        }
    }
    out
}

pub fn snapshot_csv(layer: &LayerSnapshot) -> String {
    let mut out = String::from("neuron,dim,weight,threshold\n");
    for (n, neuron) in layer.neurons.iter().enumerate() {
        for (d, w) in neuron.weights.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", n, d, fmt_num(*w), fmt_num(neuron.threshold));
        }
    }
    out
}

pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::from("hidden,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i, fmt_num(*v));
    }
    out
}

/// Everything needed to rerun a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub environment: EnvSpec,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, seeds: &[u64]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seeds: seeds.to_vec(),
            environment: config.environment.spec(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| Error::config("manifest", e.to_string()))?;
        manifest.config.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the manifest, per-seed CSVs, final network state and the summary.
/// Returns the written paths.
pub fn write_campaign(
    dir: &Path,
    config: &ExperimentConfig,
    seeds: &[u64],
    campaign: &Campaign,
    stats: Option<&SummaryStats>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![write(dir.join(MANIFEST_FILE), &Manifest::new(config, seeds).to_json())?];
    for outcome in &campaign.outcomes {
        let seed = outcome.record.seed;
        written.push(write(dir.join(format!("run_seed{seed}.csv")), &run_csv(&outcome.record))?);
        written.extend(write_snapshot(dir, &format!("seed{seed}"), &outcome.snapshot)?);
    }
    written.push(write(dir.join("summary.csv"), &summary_csv(stats))?);
    if !campaign.failures.is_empty() {
        let mut text = String::from("seed,error\n");
        for f in &campaign.failures {
            let _ = writeln!(text, "{},\"{}\"", f.seed, f.error.replace('"', "'"));
        }
        written.push(write(dir.join("failures.csv"), &text)?);
    }
    Ok(written)
}

pub fn write_snapshot(dir: &Path, tag: &str, snapshot: &NetworkSnapshot) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (i, layer) in snapshot.layers.iter().enumerate() {
        written.push(write(dir.join(format!("clusters_{tag}_layer{}.csv", i + 1)), &snapshot_csv(layer))?);
    }
    if !snapshot.values.is_empty() {
        written.push(write(dir.join(format!("values_{tag}.csv")), &values_csv(&snapshot.values))?);
    }
    Ok(written)
}
