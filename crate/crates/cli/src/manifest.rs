//! Run manifests: what was run, on what inputs, producing which files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub version: String,
    /// The only nondeterministic fields of a run.
    pub timestamps: Timestamps,
    /// SHA-256 of every input file.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every output file, keyed by name inside the output directory.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(format!("hashing {}", path.display()), e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Collects a run's inputs and outputs, then writes `manifest.json`.
#[derive(Debug)]
pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    started: String,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn start(command: &str, config: serde_json::Value) -> Self {
        ManifestBuilder {
            command: command.into(),
            config,
            started: now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn finish(self, out: &Path) -> Result<RunManifest> {
        let mut outputs = BTreeMap::new();
        for name in &self.outputs {
            outputs.insert(name.clone(), sha256_file(&out.join(name))?);
        }
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamps: Timestamps { started: self.started, finished: now() },
            inputs: self.inputs,
            outputs,
        };
        write_json(&out.join(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }
}
