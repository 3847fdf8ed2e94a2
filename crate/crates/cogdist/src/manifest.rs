//! Run manifests written next to every subcommand's outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LoadError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<InputFile>,
    pub seeds: BTreeMap<String, u64>,
    /// Effective configuration after flag, file and default resolution.
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub outputs: Vec<String>,
    pub timestamp: String,
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize) -> Self {
        let config = serde_json::to_value(config).expect("config serializes");
        let config_sha256 = sha256_hex(config.to_string().as_bytes());
        Manifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            seeds: BTreeMap::new(),
            config,
            config_sha256,
            outputs: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<String, LoadError> {
        let sha256 = file_sha256(path)?;
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: sha256.clone(),
        });
        Ok(sha256)
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }
}
