//! Output directory handling and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub subcommand: String,
    pub config: Value,
    /// SHA-256 over the subcommand, the config and every input file's bytes.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects inputs and outputs of one command run.
pub struct Run {
    dir: PathBuf,
    subcommand: &'static str,
    started_at: String,
    inputs: Vec<(String, Vec<u8>)>,
    outputs: Vec<String>,
}

impl Run {
    pub fn start(dir: &Path, subcommand: &'static str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            subcommand,
            started_at: now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Reads an input file and records its bytes for the hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
        self.inputs.push((path.display().to_string(), bytes));
        Ok(text)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(self, config: Value, seed: Option<u64>) -> Result<()> {
        let mut h = Sha256::new();
        h.update(self.subcommand.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(&config)?);
        for (_, bytes) in &self.inputs {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        let manifest = RunManifest {
            command_line: std::iter::once("hawkes".to_string()).chain(std::env::args().skip(1)).collect(),
            subcommand: self.subcommand.to_string(),
            config,
            config_hash: hex(&h.finalize()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: now(),
            inputs: self
                .inputs
                .iter()
                .map(|(p, b)| InputRecord {
                    path: p.clone(),
                    sha256: hex(&Sha256::digest(b)),
                })
                .collect(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.dir.join(MANIFEST), text.as_bytes())
    }
}
