//! Run record: per-stage wall clock and content hashes of every input and
//! output file, written alongside the artifacts as `manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use depolar_core::Result;

use crate::config::ExperimentConfig;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// The fully resolved configuration (file merged with flag overrides).
    pub config: ExperimentConfig,
    /// Wall-clock seconds per stage, in execution order.
    pub stages: Vec<(String, f64)>,
    /// Content hashes (SHA-256, hex) of files read.
    pub inputs: BTreeMap<String, String>,
    /// Content hashes of files written, the manifest itself excluded.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            stages: Vec::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// Runs `f` as a named stage, recording its wall clock.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let value = f()?;
        self.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
        Ok(value)
    }

    pub fn record_inputs(&mut self, paths: &[PathBuf]) -> Result<()> {
        for path in paths {
            self.inputs.insert(path.display().to_string(), hash_file(path)?);
        }
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.insert(path.display().to_string(), hash_file(path)?);
        Ok(())
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)
            .expect("manifest serialization cannot fail");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
