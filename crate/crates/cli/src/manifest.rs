use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn of(dir: &Path, name: &str) -> CliResult<Artifact> {
        let path = dir.join(name);
        let data = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
    pub skipped: bool,
}

/// Record of one `run-all`: what ran, how long it took, and what it wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: PipelineConfig,
    pub stages: Vec<StageTiming>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn new(config: &PipelineConfig, stages: Vec<StageTiming>, artifacts: Vec<Artifact>) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            stages,
            artifacts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Recomputes every checksum and returns the artifacts that no longer match.
    pub fn stale(&self, dir: &Path) -> CliResult<Vec<String>> {
        let mut stale = Vec::new();
        for a in &self.artifacts {
            if Artifact::of(dir, &a.path)? != *a {
                stale.push(a.path.clone());
            }
        }
        Ok(stale)
    }
}
