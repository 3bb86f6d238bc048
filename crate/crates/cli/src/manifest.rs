//! Run manifests and atomic output writes.
//!
//! Every subcommand writes `<output>.manifest.json` describing the run:
//! the full configuration, SHA-256 digests of the input files, the master
//! seed, the artifact format version, and per-stage wall-clock timings.
//! Two runs whose manifests agree on everything but the timings produce
//! byte-identical outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use candela_core::config::PipelineConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::{CliError, Result};

/// Bumped when any binary or line-delimited format changes shape.
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: u32,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            artifact_version: ARTIFACT_VERSION,
            seed: config.seed,
            config: config_map(config),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// Digests and records an input file.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest as `<output>.manifest.json`.
    pub fn write_next_to(&self, output: &Path) -> Result<PathBuf> {
        let path = suffixed(output, "manifest.json");
        let mut bytes = serde_json::to_vec_pretty(self)
            .map_err(|e| CliError::internal(format!("serializing manifest: {e}")))?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

/// The flat `key = value` configuration as a sorted map.
fn config_map(config: &PipelineConfig) -> BTreeMap<String, String> {
    config
        .to_config_string()
        .lines()
        .filter_map(|line| {
            let (k, v) = line.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// `path` with an extra dotted suffix: `model.bin` -> `model.bin.metrics.jsonl`.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes through a `.partial` file and renames into place, so a crash can
/// never leave a truncated file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let partial = suffixed(path, "partial");
    std::fs::write(&partial, bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", partial.display())))?;
    std::fs::rename(&partial, path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Accumulates labelled wall-clock laps into a manifest.
pub struct Timer {
    last: Instant,
}

impl Timer {
    pub fn start() -> Self {
        Timer {
            last: Instant::now(),
        }
    }

    /// Records the time since the previous lap under `stage`.
    pub fn lap(&mut self, manifest: &mut RunManifest, stage: &str) {
        let now = Instant::now();
        manifest.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: now.duration_since(self.last).as_secs_f64(),
        });
        self.last = now;
    }
}
