//! Experiment runner behind the `lab` binary: JSON configs in, a results
//! directory with `results.csv`, `summary.json`, `plot.svg` and
//! `manifest.json` out.

pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod report;

use curvelab::LabError;
use thiserror::Error;

pub use config::{Experiment, ExperimentConfig};
pub use output::{run, RunManifest};
pub use report::{report, ReportRow};

/// Version stamped into every manifest.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad or unreadable configuration; nothing was computed.
    #[error("config error: {0}")]
    Config(String),
    /// The run would exceed the atom or node budget.
    #[error("resource exhausted: {0}")]
    Resource(String),
    /// An operation failed during compute.
    #[error("{op} failed: {message}")]
    Failed { op: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }

    /// Process exit status: 2 for config errors, 3 for resource exhaustion,
    /// 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Resource(_) => 3,
            RunError::Failed { .. } | RunError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Resource(_) => "resource",
            RunError::Failed { .. } => "operation",
            RunError::Io(_) => "io",
        }
    }

    /// Tags an operation error with the operation that raised it.
    pub fn during(op: &str) -> impl Fn(LabError) -> RunError + '_ {
        move |e| match RunError::from(e) {
            RunError::Failed { message, .. } => RunError::Failed { op: op.to_string(), message },
            other => other,
        }
    }
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidInput(m) | LabError::Parse(m) => RunError::Config(m),
            e @ LabError::Budget { .. } => RunError::Resource(e.to_string()),
            LabError::Io(e) => RunError::Io(e),
            e => RunError::Failed { op: "compute".into(), message: e.to_string() },
        }
    }
}
