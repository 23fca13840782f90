use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("travesty ", env!("CARGO_PKG_VERSION"));

/// Provenance record that accompanies every run's outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    pub resolved_config: Value,
    pub input_digests: Vec<(PathBuf, String)>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str, resolved_config: Value, inputs: &[&Path]) -> Result<Self> {
        let input_digests = inputs
            .iter()
            .map(|p| Ok((p.to_path_buf(), sha256_file(p)?)))
            .collect::<Result<_>>()?;
        Ok(RunManifest {
            command,
            resolved_config,
            input_digests,
            outputs: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Value {
        let digests: Map<String, Value> = self
            .input_digests
            .iter()
            .map(|(p, d)| {
                (
                    p.display().to_string(),
                    Value::String(format!("sha256:{d}")),
                )
            })
            .collect();
        json!({
            "command": self.command,
            "resolved_config": self.resolved_config,
            "input_digests": digests,
            "outputs": self.outputs,
            "tool_version": TOOL_VERSION,
        })
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
