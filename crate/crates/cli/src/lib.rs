//! The `border` command line tool: instance files in, JSON verdicts out.
//!
//! Exit codes: 0 for success or a feasible verdict, 1 for unreadable or
//! invalid input, 2 for an infeasible reduced form.

pub mod commands;
pub mod schema;

use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

pub use commands::{
    cmd_check, cmd_decompose, cmd_flow_check, cmd_general_check, cmd_optimal, cmd_simulate,
};
pub use schema::{DistributionFile, Instance, InstanceFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid input: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    Core(#[from] border_core::Error),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Invalid(list) => json!({ "error": "invalid input", "issues": list }),
            CliError::Core(border_core::Error::Invalid(list)) => json!({
                "error": "invalid input",
                "issues": list.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
            }),
            other => json!({ "error": other.to_string() }),
        }
    }
}

/// A command's JSON report and the process exit code that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit: i32,
}

impl Outcome {
    pub fn ok(report: Value) -> Self {
        Outcome {
            report,
            exit: EXIT_OK,
        }
    }

    pub fn verdict(report: Value, feasible: bool) -> Self {
        Outcome {
            report,
            exit: if feasible { EXIT_OK } else { EXIT_INFEASIBLE },
        }
    }

    pub fn from_error(e: &CliError) -> Self {
        Outcome {
            report: e.to_json(),
            exit: EXIT_INPUT,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let file: InstanceFile =
        serde_json::from_str(&read(path)?).map_err(|source| CliError::Parse {
            path: path.display().to_string(),
            source,
        })?;
    file.into_instance()
}

pub fn load_distribution(path: &Path) -> Result<DistributionFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}
