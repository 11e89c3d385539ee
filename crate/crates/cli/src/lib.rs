//! Scenario configuration, sweeps and reports for the `gaussentangle` binary.

pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

pub use config::{parse_config, InitialState, OutputFormat, ScenarioConfig};
pub use error::{CliError, ConfigError};
pub use report::{run_asymptote, run_esd, run_validate, Report};
pub use sweep::{rk4_discrepancy, run_sweep, write_csv, SweepRecord, CSV_HEADER};

use std::path::Path;

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_config(&text)?)
}
