//! Experiment runner for `rwalks-core`: config files in, CSV tables out.

pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;

pub use config::{parse_config, ConfigErrors, ExperimentConfig, Kind};
pub use experiments::{run_experiment, write_experiment, RunOptions};
pub use output::{Cell, Table};

/// Environment variable overriding the config seed.
pub const SEED_ENV: &str = "RWALKS_SEED";

/// Seed precedence: command-line flag, then `RWALKS_SEED`, then the config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<Option<u64>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => config::parse_u64(s).map(Some).map_err(|e| format!("{SEED_ENV}: {e}")),
    }
}
