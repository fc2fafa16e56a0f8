use std::path::{Path, PathBuf};

use anchorplay_core::sim::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL: &str = "anchorplay";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub config: ScenarioConfig,
}

impl Manifest {
    pub fn new(
        command: &str,
        config_path: Option<PathBuf>,
        out_dir: &Path,
        seeds: Vec<u64>,
        config: ScenarioConfig,
    ) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_path,
            out_dir: out_dir.into(),
            seeds,
            config,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.into(), msg: e.to_string() })?;
        m.config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(m)
    }
}
