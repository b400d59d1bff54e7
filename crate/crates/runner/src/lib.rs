//! Scenario engine behind the `updown` command line tool.
//!
//! Configurations are TOML files (see `configs/`). Each scenario returns a
//! set of tables that are written as CSV or JSON next to a `manifest` file
//! recording the tool version, seed, configuration digest, solved
//! calibration values and a digest of every output file.

use std::path::{Path, PathBuf};

pub mod config;
pub mod infer;
pub mod output;
pub mod scenarios;

pub use config::{load_config, parse_config, ConfigError, Diagnostic, ScenarioConfig, ScenarioId};
pub use output::{Format, RunOutput, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] updown_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output error: {0}")]
    Output(String),
}

impl RunError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// Process exit status: 1 validation, 2 numerical, 3 inconsistent
    /// observation.
    pub fn exit_code(&self) -> i32 {
        use updown_core::Error as E;
        match self {
            RunError::Config(_) | RunError::Usage(_) | RunError::Model(E::Domain(_)) => 1,
            RunError::Model(E::InconsistentObservation { .. } | E::NoSolution(_)) => 3,
            _ => 2,
        }
    }
}
