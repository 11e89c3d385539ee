use std::path::PathBuf;

use gaussentangle::dynamics::DEFAULT_RK4_DT;
use gaussentangle::entanglement::{ScanOptions, DEFAULT_SCAN_POINTS};
use gaussentangle::{CovarianceState, Error as EngineError, Mat4, PhysParams};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_STEPS: usize = 1_000_000;
pub const DEFAULT_ESD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    SingleModeSqueezed {
        r: f64,
    },
    TwoModeSqueezed {
        r: f64,
    },
    /// Row-major 4x4 covariance matrix in `(x, p_x, y, p_y)` ordering.
    Custom {
        sigma: [f64; 16],
    },
}

impl InitialState {
    pub fn build(&self) -> gaussentangle::Result<CovarianceState> {
        let state = match self {
            InitialState::SingleModeSqueezed { r } => CovarianceState::single_mode_squeezed(*r),
            InitialState::TwoModeSqueezed { r } => CovarianceState::two_mode_squeezed(*r),
            InitialState::Custom { sigma } => return CovarianceState::from_raw(Mat4::from_array(sigma)),
        };
        if !state.sigma().is_finite() {
            return Err(EngineError::NonFinite { what: "squeezed state" });
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsdSettings {
    /// Search horizon; the sweep `t_max` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_esd_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_scan_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub all_crossings: bool,
}

impl Default for EsdSettings {
    fn default() -> Self {
        EsdSettings {
            t_max: None,
            tolerance: DEFAULT_ESD_TOLERANCE,
            grid_points: DEFAULT_SCAN_POINTS,
            all_crossings: false,
        }
    }
}

/// One scenario: bath and oscillator parameters, initial state, time grid
/// and temperature list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default = "default_mass")]
    pub mass: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub state: InitialState,
    pub t_max: f64,
    pub steps: usize,
    #[serde(alias = "T_list")]
    pub temperatures: Vec<f64>,
    #[serde(default)]
    pub rk4_check: bool,
    #[serde(default = "default_dt")]
    pub rk4_dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub esd: EsdSettings,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_mass() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    DEFAULT_RK4_DT
}
fn default_esd_tolerance() -> f64 {
    DEFAULT_ESD_TOLERANCE
}
fn default_scan_points() -> usize {
    DEFAULT_SCAN_POINTS
}

/// Parses and validates a JSON scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| from_json_error(&e))?;
    cfg.validate().map_err(|mut err| {
        if let Some(field) = &err.field {
            err.line = locate(text, field);
        }
        err
    })?;
    Ok(cfg)
}

fn from_json_error(e: &serde_json::Error) -> ConfigError {
    let text = e.to_string();
    let message = match text.rsplit_once(" at line ") {
        Some((msg, _)) => msg.to_string(),
        None => text,
    };
    ConfigError {
        field: None,
        line: Some(e.line()).filter(|&l| l > 0),
        column: Some(e.column()).filter(|&c| c > 0),
        message,
    }
}

/// First line mentioning the last key of a dotted field path.
fn locate(text: &str, field: &str) -> Option<usize> {
    let key = field.rsplit('.').next()?.split('[').next()?;
    let mut keys = vec![format!("\"{key}\"")];
    if key == "temperatures" {
        keys.push("\"T_list\"".to_string());
    }
    text.lines()
        .position(|line| keys.iter().any(|k| line.contains(k.as_str())))
        .map(|i| i + 1)
}

fn positive(field: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::field(
            field,
            format!("must be finite and positive, got {value}"),
        ))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::field(
                "schema",
                format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        self.base_params().map_err(|e| engine_field(&e, None))?;
        positive("t_max", self.t_max)?;
        if self.steps == 0 || self.steps > MAX_STEPS {
            return Err(ConfigError::field(
                "steps",
                format!("must be between 1 and {MAX_STEPS}, got {}", self.steps),
            ));
        }
        if self.temperatures.is_empty() {
            return Err(ConfigError::field(
                "temperatures",
                "at least one temperature is required",
            ));
        }
        for (i, &t) in self.temperatures.iter().enumerate() {
            self.params_at(t).map_err(|e| engine_field(&e, Some(i)))?;
        }
        positive("rk4_dt", self.rk4_dt)?;
        if let Some(h) = self.esd.t_max {
            positive("esd.t_max", h)?;
        }
        positive("esd.tolerance", self.esd.tolerance)?;
        if self.esd.grid_points < 2 {
            return Err(ConfigError::field(
                "esd.grid_points",
                "at least 2 scan points are required",
            ));
        }
        self.state
            .build()
            .map_err(|e| ConfigError::field(state_field(&self.state), e.to_string()))?;
        Ok(())
    }

    /// Parameters at zero temperature.
    pub fn base_params(&self) -> gaussentangle::Result<PhysParams> {
        PhysParams::with_mass(self.mass, self.omega1, self.omega2, self.lambda, 0.0)
    }

    pub fn params_at(&self, temperature: f64) -> gaussentangle::Result<PhysParams> {
        self.base_params()?.at_temperature(temperature)
    }

    pub fn initial_state(&self) -> gaussentangle::Result<CovarianceState> {
        self.state.build()
    }

    /// `steps + 1` equally spaced times from 0 to `t_max`.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.steps as f64;
        (0..=self.steps).map(|k| self.t_max * (k as f64 / n)).collect()
    }

    pub fn esd_horizon(&self) -> f64 {
        self.esd.t_max.unwrap_or(self.t_max)
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            grid_points: self.esd.grid_points,
            tolerance: self.esd.tolerance,
            all_crossings: self.esd.all_crossings,
        }
    }
}

fn state_field(state: &InitialState) -> &'static str {
    match state {
        InitialState::Custom { .. } => "state.sigma",
        _ => "state.r",
    }
}

fn engine_field(e: &EngineError, index: Option<usize>) -> ConfigError {
    let field = match (e, index) {
        (_, Some(i)) => format!("temperatures[{i}]"),
        (EngineError::InvalidParameter { name, .. }, None) => name.to_string(),
        _ => "params".to_string(),
    };
    ConfigError::field(field, e.to_string())
}
