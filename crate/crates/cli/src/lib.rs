//! Config-driven experiment runner for `squidcav-core`: named experiments,
//! parameter sweeps and reproducible CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod setup;
pub mod sweep;

pub use config::{Experiment, ExperimentConfig, ModelChoice, Overrides};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, Payload, ResultRecord, RunOutput};
pub use sweep::{sweep, SweepOutput};
