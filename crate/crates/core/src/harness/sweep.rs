//! Grid search over dotted configuration keys.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::Objective;
use crate::error::{Error, Result};
use crate::harness::campaign::run_campaign;
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::{summarize, SummaryStats};

pub const DEFAULT_CAP: usize = 100;

fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_cap")]
    pub cap: usize,
    pub seeds: Vec<u64>,
    /// Experiment configuration the grid values are written into.
    pub base: toml::Value,
    /// Dotted key path to candidate values.
    pub grid: BTreeMap<String, Vec<toml::Value>>,
}

/// Dotted key and the value written there.
pub type Overrides = Vec<(String, toml::Value)>;

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub overrides: Overrides,
    pub config: ExperimentConfig,
    pub stats: Option<SummaryStats>,
    pub failures: usize,
}

impl SweepSpec {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let value: toml::Value =
            toml::from_str(source).map_err(|e| Error::config("<document>", e.message().to_string()))?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let key = e.path().to_string();
            Error::config(key, e.into_inner().to_string())
        })
    }

    pub fn combination_count(&self) -> usize {
        self.grid.values().map(Vec::len).product()
    }

    /// Every grid point as a validated configuration, in odometer order with
    /// the last key varying fastest.
    pub fn expand(&self) -> Result<Vec<(Overrides, ExperimentConfig)>> {
        let count = self.combination_count();
        if count > self.cap {
            return Err(Error::SweepTooLarge { count, cap: self.cap });
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        let keys: Vec<&String> = self.grid.keys().collect();
        let mut out = Vec::with_capacity(count);
        for index in 0..count {
            let mut rest = index;
            let mut picks = vec![0; keys.len()];
            for k in (0..keys.len()).rev() {
                let n = self.grid[keys[k]].len();
                picks[k] = rest % n;
                rest /= n;
            }
            let mut value = self.base.clone();
            let mut overrides = Vec::with_capacity(keys.len());
            for (k, &p) in keys.iter().zip(&picks) {
                let v = self.grid[*k][p].clone();
                set_path(&mut value, k, v.clone())?;
                overrides.push(((*k).clone(), v));
            }
            let mut config = ExperimentConfig::from_toml_value(value)?;
            config.id = format!("{}-{}", config.id, index);
            out.push((overrides, config));
        }
        Ok(out)
    }

    /// Runs the grid and returns entries best first.
    pub fn run(&self, parallel: bool) -> Result<Vec<SweepEntry>> {
        let mut entries = Vec::new();
        for (overrides, config) in self.expand()? {
            let campaign = run_campaign(&config, &self.seeds, parallel);
            let stats = if campaign.outcomes.is_empty() {
                None
            } else {
                Some(summarize(&campaign.records(), config.window, config.environment.spec().objective)?)
            };
            entries.push(SweepEntry {
                overrides,
                config,
                stats,
                failures: campaign.failures.len(),
            });
        }
        rank(&mut entries);
        Ok(entries)
    }
}

/// Stable sort: best windowed mean first, entries without results last.
pub fn rank(entries: &mut [SweepEntry]) {
    entries.sort_by(|a, b| {
        let key = |e: &SweepEntry| {
            e.stats.as_ref().map(|s| match e.config.environment.spec().objective {
                Objective::LowerIsBetter => s.mean,
                Objective::HigherIsBetter => -s.mean,
            })
        };
        match (key(a), key(b)) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
    });
}

/// Writes `value` at a dotted path, creating intermediate tables.
pub fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(path, "empty path segment"));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{part}` is inside a non-table value")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::config(path, "parent is not a table"))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
