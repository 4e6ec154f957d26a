//! Settings from flags, an optional TOML file, and defaults, in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

/// A bad setting, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(field: &str, reason: impl fmt::Display) -> anyhow::Error {
    ConfigError(format!("invalid configuration: {field}: {reason}")).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub scale: Option<Scale>,
    pub curves: CurvesFile,
    pub clearing: ClearingFile,
    pub improved: ImprovedFile,
    pub rss: RssFile,
    pub corpus: CorpusFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesFile {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<u32>,
    pub k_values: Option<Vec<u32>>,
    pub m_values: Option<Vec<usize>>,
    pub n_values: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClearingFile {
    pub algorithm: Option<String>,
    pub betas: Option<Vec<f64>>,
    pub trials: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImprovedFile {
    pub betas: Option<Vec<f64>>,
    pub trials: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RssFile {
    pub kind: Option<Vec<String>>,
    pub m: Option<Vec<usize>>,
    pub beta: Option<Vec<f64>>,
    pub cycles: Option<usize>,
    pub corpus: Option<PathBuf>,
    pub k: Option<u32>,
    pub algorithm: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusFile {
    pub monitors: Option<usize>,
    pub destinations: Option<usize>,
    pub cycles: Option<usize>,
    pub path_length: Option<f64>,
    pub sharing: Option<f64>,
    pub dynamics: Option<f64>,
}

pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_error("config", format!("{}: {e}", path.display())))
}

/// Flag, then file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub scale: Scale,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "results";
