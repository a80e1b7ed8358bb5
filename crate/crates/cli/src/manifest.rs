use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Request;
use crate::error::{read_text, write_text, CliError};

pub const SCHEMA: &str = "lsmat-manifest/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_owned(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub version: String,
    /// Fully resolved request, including the complete solver config.
    pub request: Request,
    pub threads: Option<u32>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Wall-clock time per phase, milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
    /// Iteration statistics per phase.
    pub iterations: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        // serializing plain data to a string cannot fail
        let text = serde_json::to_string_pretty(self).unwrap();
        write_text(path, &(text + "\n"))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("manifest: {e}")))?;
        let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or("");
        if schema != SCHEMA {
            return Err(CliError::BadInput(format!(
                "manifest schema mismatch: expected `{SCHEMA}`, found `{schema}`"
            )));
        }
        serde_json::from_value(value).map_err(|e| CliError::BadInput(format!("manifest: {e}")))
    }
}

/// `<path>.manifest.json`.
pub fn default_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
