use std::fmt;

use thiserror::Error;

/// A configuration problem, located in the source document when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: Some(field.into()),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
            if let Some(col) = self.column {
                write!(f, ", column {col}")?;
            }
        }
        if let Some(field) = &self.field {
            write!(f, " in `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Engine(#[from] gaussentangle::Error),

    #[error("rk4 cross-check failed: max |S_closed - S_rk4| = {max:e} exceeds {limit:e}")]
    Rk4Mismatch { max: f64, limit: f64 },

    #[error("CP validation failed at T = {temperature}")]
    CpViolation { temperature: f64 },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration, 3 for physics or validation, 4 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use gaussentangle::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Engine(
                E::Singular { .. }
                | E::NormTooLarge { .. }
                | E::TooManySteps { .. }
                | E::NonFinite { .. }
                | E::InfiniteNegativity,
            ) => 4,
            CliError::Engine(_) | CliError::CpViolation { .. } => 3,
            CliError::Rk4Mismatch { .. } => 4,
        }
    }
}
