//! Run configuration: defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use underfit::{FitConfig, NmuConfig};

/// Contents of a `--config` file. Every field is optional and unknown keys are
/// rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rank: Option<usize>,
    pub sigmas: Option<Vec<f64>>,
    /// Solver settings for the `nmu` command.
    pub nmu: NmuConfig,
    /// Pipeline settings for `fit`, `sweep` and `report`.
    pub fit: FitConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Input path from the flag or the file, checked to exist.
    pub fn input(&self, flag: Option<&PathBuf>) -> Result<PathBuf> {
        let Some(path) = flag.or(self.input.as_ref()) else {
            bail!("no input given (use --input or the config file)");
        };
        if !path.is_file() {
            bail!("input {} is not a readable file", path.display());
        }
        Ok(path.clone())
    }

    /// Output directory from the flag or the file (default `.`), created if
    /// missing.
    pub fn output_dir(&self, flag: Option<&PathBuf>) -> Result<PathBuf> {
        let dir = flag.or(self.output_dir.as_ref()).cloned().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(dir)
    }
}
