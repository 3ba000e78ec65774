//! Run manifest written next to every sweep CSV.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::result::SweepResult;
use super::sweep::SweepConfig;
use crate::error::{Error, Result};

/// Provenance of one sweep output. Contains no timestamps, so identical
/// reruns produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// SHA-256 of the resolved configuration, output path excluded.
    pub config_sha256: String,
    pub csv_sha256: String,
    pub seeds: Vec<u64>,
    pub rows: usize,
    pub config: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of `cfg` with its output path removed.
pub fn config_hash(cfg: &SweepConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.output = None;
    let json = serde_json::to_vec(&c).map_err(|e| Error::Output(e.to_string()))?;
    Ok(sha256_hex(&json))
}

impl RunManifest {
    pub fn new(cfg: &SweepConfig, result: &SweepResult) -> Result<Self> {
        let mut c = cfg.clone();
        c.output = None;
        Ok(Self {
            tool: "mwpt".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: cfg.scenario.label().into(),
            config_sha256: config_hash(cfg)?,
            csv_sha256: sha256_hex(result.to_csv()?.as_bytes()),
            seeds: cfg.seeds.clone(),
            rows: result.rows.len(),
            config: serde_json::to_value(&c).map_err(|e| Error::Output(e.to_string()))?,
        })
    }
}

/// Sidecar path: `<csv path>.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the CSV to `path` and the manifest beside it.
pub fn write_outputs(cfg: &SweepConfig, result: &SweepResult, path: &Path) -> Result<()> {
    result.write_csv(path)?;
    let manifest = RunManifest::new(cfg, result)?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Output(e.to_string()))?;
    let mpath = manifest_path(path);
    std::fs::write(&mpath, text + "\n").map_err(|e| Error::Output(format!("{}: {e}", mpath.display())))
}
