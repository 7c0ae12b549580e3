use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use vocadapt::script::ScriptClass;

/// Reads a `.json` file as JSON and anything else as TOML.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    } else {
        toml::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

/// `adapt` settings; relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptFile {
    pub base: Option<PathBuf>,
    pub donor: Option<PathBuf>,
    pub target_script: Option<ScriptClass>,
    pub utility_budget: Option<usize>,
    pub guard_threshold: Option<f64>,
    pub batch_size: Option<usize>,
    pub guard_domains: Vec<PathBuf>,
    pub target_domains: Vec<PathBuf>,
    pub reference: Vec<PathBuf>,
}
