//! Seeded experiment runs and the reports they emit. Every report carries
//! the schema version and the SHA-256 of the effective configuration, so
//! the same config and seed regenerate it byte for byte.

mod config;
mod runs;

pub use config::{
    CharacterizeConfig, DestructConfig, EngineConfig, ExperimentConfig, SensitivityConfig,
    SigmaProfile, SpatialConfig, VerifyConfig, VerifyRegime,
};
pub use runs::{
    run_census, run_characterization, run_compute, run_destruct, run_sensitivity,
    run_spatial_profile, run_verification, verify_pair, ComputeBackend, ComputeRequest,
    ComputeResult, DestructBaseline, DestructResult, SensitivityRow, SpatialRow, VerifyRow,
};

use serde::Serialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl ExperimentError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Input(_) => 3,
            Self::Invariant(_) => 2,
            Self::Io(_) | Self::Other(_) => 1,
        }
    }

    pub(crate) fn input(e: impl std::fmt::Display) -> Self {
        Self::Input(e.to_string())
    }

    pub(crate) fn other(e: impl std::fmt::Display) -> Self {
        Self::Other(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportBody {
    Json(serde_json::Value),
    /// CSV text with its header line.
    Csv(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub body: ReportBody,
}

impl Report {
    pub fn json(command: &str, value: &impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            body: ReportBody::Json(serde_json::to_value(value).expect("report serializes")),
        }
    }

    pub fn csv(command: &str, text: String) -> Self {
        Self {
            command: command.to_string(),
            body: ReportBody::Csv(text),
        }
    }

    pub fn is_csv(&self) -> bool {
        matches!(self.body, ReportBody::Csv(_))
    }

    /// JSON reports get an envelope; CSV reports a leading `#` line.
    pub fn render(&self, config: &ExperimentConfig) -> String {
        match &self.body {
            ReportBody::Json(v) => {
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.command,
                    "config_digest": config.digest(),
                    "seed": config.seed,
                    "result": v,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                s
            }
            ReportBody::Csv(text) => format!(
                "# manyrow {} schema_version={} config_digest={} seed={}\n{}",
                self.command,
                SCHEMA_VERSION,
                config.digest(),
                config.seed,
                text
            ),
        }
    }
}

/// Writes rows as CSV with `header`; each row is already formatted.
pub fn csv_lines(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}
