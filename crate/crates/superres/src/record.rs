//! Experiment records: the resolved config, the seed and every simulated
//! count, stored as JSON.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use superres_core::montecarlo::{BatchSettings, ShotBatch};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// One simulated count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub label: String,
    pub n_shots: u64,
    pub n_ones: u64,
    pub settings: BatchSettings,
}

impl CountRecord {
    pub fn new(label: impl Into<String>, batch: &ShotBatch) -> Self {
        CountRecord {
            label: label.into(),
            n_shots: batch.n_shots,
            n_ones: batch.n_ones,
            settings: batch.settings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub version: String,
    /// Subcommand that produced the counts.
    pub command: String,
    pub master_seed: u64,
    /// Fully resolved configuration, seed included.
    pub config: RunConfig,
    pub wall_clock_s: f64,
    pub created_unix: u64,
    pub counts: Vec<CountRecord>,
}

impl ExperimentRecord {
    pub fn new(
        command: &str,
        master_seed: u64,
        config: RunConfig,
        wall_clock_s: f64,
        counts: Vec<CountRecord>,
    ) -> Self {
        ExperimentRecord {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            master_seed,
            config,
            wall_clock_s,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            counts,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Numerical(format!("record serialization failed: {e}")))
    }

    pub fn from_json(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| CliError::config(format!("unparsable record: {e}")))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let s = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&s)
    }
}

/// Serialized form used to compare counts byte for byte.
pub fn counts_fingerprint(counts: &[CountRecord]) -> CliResult<String> {
    serde_json::to_string(counts).map_err(|e| CliError::Numerical(e.to_string()))
}
