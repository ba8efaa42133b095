//! Experiment harness around the reservoir simulator: configuration files,
//! deterministic seed plumbing, the (N1, N2) sweep, and CSV artifacts.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod sweep;

pub use config::{CalibrationMode, Experiment, ExperimentConfig};
pub use error::{CliError, Result};
pub use pipeline::{run_experiment, RunArtifacts};
pub use sweep::{run_sweep, CellOutcome, SweepCell, SweepResult};
