//! Run manifests: everything needed to reproduce an invocation's outputs
//! byte-for-byte: resolved config, derived seeds, input checksum, and the
//! produced file list.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use sensebeam_core::sim::Seeds;

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: &'static str,
    pub command: String,
    /// Resolved config snapshot, after any CLI overrides.
    pub config: Config,
    pub seeds: Seeds,
    /// `sha256:<hex>` of the trace file, or a `synthetic:...` tag.
    pub trace_checksum: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config, trace_path: Option<&Path>) -> Result<Self, CliError> {
        let trace_checksum = match trace_path {
            Some(path) => {
                let bytes = fs::read(path)
                    .map_err(|e| CliError::Trace(format!("cannot read trace {}: {e}", path.display())))?;
                format!("sha256:{}", hex::encode(Sha256::digest(&bytes)))
            }
            None => format!(
                "synthetic:{}:{}:{}:{}",
                serde_json::to_value(config.trace.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_else(|| "unknown".into()),
                config.trace.slots.unwrap_or(0),
                config.trace.speed.unwrap_or(0.0),
                config.seed,
            ),
        };
        Ok(Self {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            seeds: config.seeds(),
            trace_checksum,
            trace_path: trace_path.map(|p| p.display().to_string()),
            axis: None,
            values: None,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Output(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        fs::write(path, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
    }
}
