//! Process-level error classification.
//!
//! Every failure surfaces as one of three categories with a stable exit
//! code: usage errors (1) for bad flags or incoherent configuration, data
//! errors (2) for unreadable or malformed input, and numerical errors (3)
//! when a solve breaks down on otherwise well-formed input.

use reclasso::arx::ArxError;
use reclasso::datagen::DatagenError;
use reclasso::homotopy::HomotopyError;
use reclasso::tuning::TuningError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Prefixes the message with where the failure happened (method,
    /// replication) without changing its category.
    pub fn with_context(self, context: &str) -> CliError {
        match self {
            CliError::Usage(msg) => CliError::Usage(format!("{context}: {msg}")),
            CliError::Data(msg) => CliError::Data(format!("{context}: {msg}")),
            CliError::Numerical(msg) => CliError::Numerical(format!("{context}: {msg}")),
        }
    }
}

impl From<ArxError> for CliError {
    fn from(e: ArxError) -> Self {
        match e {
            // An empty design can only come from the lag flags.
            ArxError::InvalidLags => CliError::Usage(e.to_string()),
            ArxError::RankDeficient { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DatagenError> for CliError {
    fn from(e: DatagenError) -> Self {
        match e {
            DatagenError::RescaleFailed { .. } | DatagenError::UnstableModel { .. } => {
                CliError::Numerical(e.to_string())
            }
            // Everything else reflects the simulation flags.
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<TuningError> for CliError {
    fn from(e: TuningError) -> Self {
        match e {
            TuningError::InvalidSplit { .. } | TuningError::InvalidGrid { .. } => {
                CliError::Usage(e.to_string())
            }
            TuningError::DegenerateDesign => CliError::Data(e.to_string()),
            TuningError::NoViableThread => CliError::Numerical(e.to_string()),
            TuningError::Design(inner) => inner.into(),
            TuningError::Model(inner) => inner.into(),
        }
    }
}

impl From<HomotopyError> for CliError {
    fn from(e: HomotopyError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
