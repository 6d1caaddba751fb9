//! Configuration, the studies and their CSV output.

pub mod config;
pub mod measure;
pub mod output;
pub mod studies;
pub mod validate;

use std::path::Path;

use thiserror::Error;

use crate::spectra::SpectrumError;

pub use config::{parse_config, parse_config_str, Config, ConfigError, OverhauserMode, OverhauserSpec, SweepParameter, SweepSpec};
pub use studies::{overhauser_study, run_spectrum, sweep_dephasing, sweep_detuning, sweep_injection, StudyReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ExperimentError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// Process exit code: 1 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            _ => 2,
        }
    }
}
