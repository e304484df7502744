//! JSON configuration files. Keys mirror the long command-line flags; flags
//! override file values and `COPREG_SEED` overrides the file's seed.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::formats::read_file;

pub const SEED_ENV: &str = "COPREG_SEED";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub family: Option<String>,
    pub other: Option<String>,
    pub what: Option<String>,
    pub cells: Option<usize>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub s: Option<f64>,
    pub tau: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub check: Option<Vec<String>>,
    pub threads: Option<usize>,
    pub timing: Option<bool>,
    pub n: Option<usize>,
    pub resolution: Option<usize>,
    pub data: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Seed after applying the environment override; flags are applied by the caller.
    pub fn seed_with_env(&self, env: Option<&str>) -> CliResult<Option<u64>> {
        match env {
            Some(raw) => raw
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw} is not a 64-bit unsigned integer"))),
            None => Ok(self.seed),
        }
    }
}

/// Flag value, else file value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag list if non-empty, else file list, else default.
pub fn pick_list<T>(flag: Vec<T>, file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if !flag.is_empty() {
        flag
    } else {
        file.unwrap_or(default)
    }
}
