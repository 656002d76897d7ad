//! Defaults read from a TOML file; flags win over file values.
//!
//! ```toml
//! k = 100
//! n = 500
//! N = 20
//! seed = 7
//! methods = ["gdtspn_knn", "average"]
//!
//! [csv]
//! case = "case_id"
//! timestamp_format = "rfc3339"
//! ```

use std::path::Path;

use serde::Deserialize;
use spnknn_core::event_log::{ColumnMapping, TimestampFormat};
use spnknn_core::{ExperimentConfig, Method, SimulationConfig};

use crate::args::{CsvArgs, ParamArgs};
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub iterations: Option<usize>,
    pub max_firings: Option<usize>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<Method>>,
    pub jobs: Option<usize>,
    pub raw_average: Option<bool>,
    pub split_test_count: Option<usize>,
    #[serde(default)]
    pub csv: CsvSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSection {
    pub case: Option<String>,
    pub activity: Option<String>,
    pub timestamp: Option<String>,
    pub timestamp_format: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config file '{}': {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config file '{}': {}", path.display(), e.message())))
    }

    pub fn csv(&self, flags: &CsvArgs) -> Result<(ColumnMapping, TimestampFormat), CliError> {
        let d = ColumnMapping::default();
        let pick = |flag: &Option<String>, file: &Option<String>, default: String| {
            flag.clone().or_else(|| file.clone()).unwrap_or(default)
        };
        let mapping = ColumnMapping {
            case: pick(&flags.case_column, &self.csv.case, d.case),
            activity: pick(&flags.activity_column, &self.csv.activity, d.activity),
            timestamp: pick(&flags.timestamp_column, &self.csv.timestamp, d.timestamp),
        };
        let format = match flags.timestamp_format.as_ref().or(self.csv.timestamp_format.as_ref()) {
            Some(f) => f.parse().map_err(|e| CliError::Usage(format!("{e}")))?,
            None => TimestampFormat::default(),
        };
        Ok((mapping, format))
    }

    pub fn experiment(
        &self,
        params: &ParamArgs,
        iterations: Option<usize>,
        methods: Option<Vec<Method>>,
    ) -> Result<ExperimentConfig, CliError> {
        let d = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            n: iterations.or(self.iterations).unwrap_or(d.n),
            k: params.k.or(self.k).unwrap_or(d.k),
            n_runs: params.n.or(self.n).unwrap_or(d.n_runs),
            max_firings_per_run: params.max_firings.or(self.max_firings).unwrap_or(d.max_firings_per_run),
            seed: params.seed.or(self.seed).unwrap_or(d.seed),
            methods: methods.or_else(|| self.methods.clone()).unwrap_or(d.methods),
            subtract_elapsed: !(params.raw_average || self.raw_average.unwrap_or(false)),
        };
        if cfg.n == 0 || cfg.k == 0 || cfg.n_runs == 0 || cfg.max_firings_per_run == 0 {
            return Err(CliError::Usage("N, k, n and --max-firings must be at least 1".into()));
        }
        if cfg.methods.is_empty() {
            return Err(CliError::Usage("no method selected".into()));
        }
        Ok(cfg)
    }

    pub fn simulation(&self, cfg: &ExperimentConfig) -> SimulationConfig {
        SimulationConfig {
            n_runs: cfg.n_runs,
            max_firings_per_run: cfg.max_firings_per_run,
            seed: cfg.seed,
        }
    }
}
