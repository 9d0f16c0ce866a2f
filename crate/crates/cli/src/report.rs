//! Experiment configuration echo and the persisted report record.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub params: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, String>,
    pub seed: u64,
    pub deterministic: bool,
}

impl ExperimentConfig {
    pub fn new(command: &str, seed: u64, deterministic: bool) -> Self {
        Self { command: command.to_string(), inputs: BTreeMap::new(), params: BTreeMap::new(), outputs: BTreeMap::new(), seed, deterministic }
    }

    pub fn input(&mut self, key: &str, path: &Path) -> &mut Self {
        self.inputs.insert(key.to_string(), path.display().to_string());
        self
    }

    pub fn output(&mut self, key: &str, path: &Path) -> &mut Self {
        self.outputs.insert(key.to_string(), path.display().to_string());
        self
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("parameters serialize"));
        self
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON (keys sorted).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))[..16].to_string()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Distance to the bound, positive when it holds.
    pub slack: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub results: Value,
    pub passed: bool,
    pub timestamp: u64,
}

impl ReportRecord {
    pub fn new(config: ExperimentConfig) -> Self {
        let config_hash = config.hash();
        Self { config, config_hash, constants: BTreeMap::new(), checks: Vec::new(), results: Value::Null, passed: true, timestamp: 0 }
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn check(&mut self, name: &str, passed: bool, slack: Option<f64>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), passed, slack });
    }

    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}-{}.json", self.config.command, self.config_hash))
    }

    /// Stamps the record and writes it as `<command>-<hash>.json`.
    pub fn write(&mut self, dir: &Path) -> anyhow::Result<PathBuf> {
        self.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = self.path_in(dir);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing report {}", path.display()))?;
        Ok(path)
    }
}
