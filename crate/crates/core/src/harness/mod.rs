//! Experiment configuration, the deterministic runner and report output.

mod config;
mod emit;
mod run;

pub use config::{
    CheckpointPolicy, ExperimentConfig, OutputFormat, OutputSettings, RangeSettings, ReturnSettings, TestName,
};
pub use emit::{emit_report, REPORT_FILE, TIMING_FILE};
pub use run::{
    resolve_checkpoints, run_experiment, simulate_ensemble, validate, SeedDerivation, SummaryReport, TestError,
    LIL_MIN_STEPS,
};

use thiserror::Error;

use crate::environment::EnvError;
use crate::statistics::StatsError;
use crate::walk::WalkError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("a master seed is required")]
    MissingSeed,
    #[error("test {test} cannot run: {reason}")]
    Precondition { test: &'static str, reason: String },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
