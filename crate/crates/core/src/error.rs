use std::path::PathBuf;

use thiserror::Error;

/// One failing field found while validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("density matrix validation failed: {0}")]
    Validation(String),

    #[error("{quantity} = {value} outside validity window [{min}, {max}]")]
    Range {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("degenerate state: every pair amplitude is zero")]
    DegenerateState,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("half-maximum crossing not found inside the grid; widen the grid")]
    IncompleteSupport,

    #[error("no signal: {0}")]
    NoSignal(String),

    #[error("no data: all counts are zero")]
    NoData,

    #[error("singular measurement design: {0}")]
    SingularDesign(String),

    #[error("channel `{label}` violates energy conservation: residual {residual_nm:.4} nm exceeds {tolerance_nm} nm")]
    EnergyConservation {
        label: String,
        residual_nm: f64,
        tolerance_nm: f64,
    },

    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<FieldError>),

    #[error("missing upstream file {}: {hint}", .path.display())]
    MissingDependency { path: PathBuf, hint: String },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("reconstruction did not converge for `{0}`")]
    NotConverged(String),

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
