use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Record of one command invocation, written before its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Full argument vector, enough to replay the run.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub options: Vec<(String, String)>,
    pub output_dir: String,
    pub outputs: Vec<String>,
    /// Wall time per stage in seconds, execution order.
    pub timings_s: Vec<(String, f64)>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Param(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            reason: e.to_string(),
        })
    }
}
