//! Experiment configuration: a flat TOML file covering the reservoir, the
//! analysis options, and the output plumbing, with defaults for every key.

use std::fs;
use std::path::{Path, PathBuf};

use boolres_core::metrics::{ConsistencyOptions, DimensionalityOptions};
use boolres_core::seeds::{derive, purpose};
use boolres_core::sim::{
    build_delay_line, CalibrationTable, DelayLineMode, LineId, ReservoirConfig,
    DEFAULT_JITTER_SIGMA_NS, DEFAULT_MAX_EVENTS, DEFAULT_PULSE_REJECT_NS,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Which pipeline a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Per-word transient waveform dumps.
    Transients,
    /// Self- and cross-distance curves plus the consistency window.
    Consistency,
    /// Window, rank measures, and D for the configured cell.
    Dimensionality,
    /// The (N1, N2) grid of dimensionality measurements.
    Sweep,
    /// Train a classifier set and persist it.
    Train,
    /// Train, evaluate on fresh runs, and emit the error curve.
    Classify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transients => "transients",
            Experiment::Consistency => "consistency",
            Experiment::Dimensionality => "dimensionality",
            Experiment::Sweep => "sweep",
            Experiment::Train => "train",
            Experiment::Classify => "classify",
        }
    }
}

/// How element delays are drawn when a delay line is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Heterogeneous delays rescaled to the calibration-table total.
    #[default]
    Table,
    /// Heterogeneous delays with whatever total they sum to.
    Sampled,
    /// Every element at the mean delay.
    Uniform,
}

fn default_n() -> usize {
    8
}
fn default_n2() -> usize {
    11
}
fn default_range() -> (usize, usize) {
    (7, 20)
}
fn default_jitter() -> f64 {
    DEFAULT_JITTER_SIGMA_NS
}
fn default_reject() -> f64 {
    DEFAULT_PULSE_REJECT_NS
}
fn default_max_events() -> u64 {
    DEFAULT_MAX_EVENTS
}
fn default_trials() -> usize {
    50
}
fn default_tau() -> f64 {
    100.0
}
fn default_threshold() -> f64 {
    0.9
}
fn default_record_len() -> f64 {
    600.0
}
fn default_grid_step() -> f64 {
    2.5
}
fn default_rank_tol() -> f64 {
    1e-6
}
fn default_gamma_prefix() -> usize {
    40
}
fn default_ridge() -> f64 {
    boolres_core::readout::DEFAULT_RIDGE
}
fn default_series_samples() -> usize {
    boolres_core::readout::DEFAULT_SERIES_SAMPLES
}
fn default_window() -> usize {
    boolres_core::readout::DEFAULT_CLASSIFY_WINDOW
}
fn default_word_bits() -> usize {
    2
}
fn default_split() -> usize {
    100
}
fn default_seed() -> u64 {
    42
}

/// Everything one experiment run needs, resolvable from a TOML file plus
/// command-line overrides. Every key has a default, so an empty file is a
/// valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Pipeline to run when not fixed by the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,

    // Reservoir geometry.
    #[serde(default = "default_n")]
    pub n1: usize,
    #[serde(default = "default_n2")]
    pub n2: usize,
    /// Inclusive (low, high) element-count ranges scanned by `sweep`.
    #[serde(default = "default_range")]
    pub n1_range: (usize, usize),
    #[serde(default = "default_range")]
    pub n2_range: (usize, usize),
    #[serde(default)]
    pub calibration: CalibrationMode,
    /// Calibration table file; the bundled measurements when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_table: Option<PathBuf>,
    #[serde(default)]
    pub gate_delay: f64,
    #[serde(default = "default_jitter")]
    pub jitter_sigma: f64,
    #[serde(default = "default_reject")]
    pub pulse_reject_width: f64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,

    // Consistency estimation.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_record_len")]
    pub record_len: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,

    // Rank measures.
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_gamma_prefix")]
    pub gamma_prefix_len: usize,

    // Readout.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_series_samples")]
    pub series_samples: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_word_bits")]
    pub word_bits: usize,
    #[serde(default = "default_split")]
    pub train_trials: usize,
    #[serde(default = "default_split")]
    pub test_trials: usize,

    // Plumbing.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 leaves the pool at the machine default.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config must deserialize from defaults")
    }
}

impl ExperimentConfig {
    /// Reads a config file; a run manifest (with its `[config]` table) is
    /// accepted as well, so any emitted manifest replays directly.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let parsed: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::Domain(format!("config {}: {e}", path.display())))?;
        let config_value = match parsed.get("config") {
            Some(inner) => inner.clone(),
            None => toml::Value::Table(parsed),
        };
        let config: Self = config_value
            .try_into()
            .map_err(|e| CliError::Domain(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes the resolved configuration.
    pub fn emit(&self) -> String {
        toml::to_string_pretty(self).expect("config must serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |n: usize| (1..=64).contains(&n);
        if !in_range(self.n1) || !in_range(self.n2) {
            return Err(CliError::Domain(format!(
                "element counts must lie in [1, 64], got N1={} N2={}",
                self.n1, self.n2
            )));
        }
        for (label, (lo, hi)) in [("n1_range", self.n1_range), ("n2_range", self.n2_range)] {
            if lo > hi || !in_range(lo) || !in_range(hi) {
                return Err(CliError::Domain(format!(
                    "{label} must be an increasing pair within [1, 64], got ({lo}, {hi})"
                )));
            }
        }
        let positive = [
            ("tau", self.tau),
            ("record_len", self.record_len),
            ("grid_step", self.grid_step),
        ];
        for (label, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CliError::Domain(format!(
                    "{label} must be positive and finite, got {value}"
                )));
            }
        }
        let non_negative = [
            ("gate_delay", self.gate_delay),
            ("jitter_sigma", self.jitter_sigma),
            ("pulse_reject_width", self.pulse_reject_width),
            ("ridge", self.ridge),
        ];
        for (label, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(CliError::Domain(format!(
                    "{label} must be non-negative and finite, got {value}"
                )));
            }
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(CliError::Domain(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(CliError::Domain(format!(
                "rank_tol must lie in (0, 1), got {}",
                self.rank_tol
            )));
        }
        if self.trials == 0 || self.train_trials == 0 || self.test_trials == 0 {
            return Err(CliError::Domain(
                "trials, train_trials, and test_trials must all be at least 1".to_string(),
            ));
        }
        if !(1..=boolres_core::readout::MAX_WORD_BITS).contains(&self.word_bits) {
            return Err(CliError::Domain(format!(
                "word_bits must lie in [1, {}], got {}",
                boolres_core::readout::MAX_WORD_BITS,
                self.word_bits
            )));
        }
        if self.window == 0 || self.series_samples <= self.window {
            return Err(CliError::Domain(format!(
                "need series_samples > window >= 1, got series_samples={} window={}",
                self.series_samples, self.window
            )));
        }
        if let Some(table) = &self.calibration_table {
            if !table.exists() {
                return Err(CliError::Io(format!(
                    "calibration table {} does not exist",
                    table.display()
                )));
            }
        }
        Ok(())
    }

    /// The calibration table backing delay-line construction.
    pub fn table(&self) -> Result<CalibrationTable> {
        match &self.calibration_table {
            None => Ok(CalibrationTable::bundled()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Io(format!("cannot read table {}: {e}", path.display()))
                })?;
                Ok(CalibrationTable::parse(&text)?)
            }
        }
    }

    /// Builds the reservoir for grid cell (n1, n2). Each cell roots its own
    /// seed in the master seed and its element counts, so any cell can be
    /// reproduced without running the rest of the grid.
    pub fn cell_reservoir(&self, n1: usize, n2: usize) -> Result<ReservoirConfig> {
        let table = self.table()?;
        let cell_seed = derive(self.seed, &[purpose::GRID_CELL, n1 as u64, n2 as u64]);
        let (mode1, mode2) = match self.calibration {
            CalibrationMode::Table => (
                DelayLineMode::TableCalibrated(LineId::Line1),
                DelayLineMode::TableCalibrated(LineId::Line2),
            ),
            CalibrationMode::Sampled => (
                DelayLineMode::SampledHeterogeneous,
                DelayLineMode::SampledHeterogeneous,
            ),
            CalibrationMode::Uniform => (DelayLineMode::Uniform, DelayLineMode::Uniform),
        };
        let line1 = build_delay_line(n1, mode1, &table, derive(cell_seed, &[1]))?;
        let line2 = build_delay_line(n2, mode2, &table, derive(cell_seed, &[2]))?;
        let mut reservoir = ReservoirConfig::new(line1, line2, cell_seed);
        reservoir.gate_delay = self.gate_delay;
        reservoir.jitter_sigma = self.jitter_sigma;
        reservoir.pulse_reject_width = self.pulse_reject_width;
        reservoir.max_events = self.max_events;
        Ok(reservoir)
    }

    /// The reservoir for the configured (n1, n2) cell.
    pub fn reservoir(&self) -> Result<ReservoirConfig> {
        self.cell_reservoir(self.n1, self.n2)
    }

    pub fn consistency_options(&self) -> ConsistencyOptions {
        ConsistencyOptions {
            tau: self.tau,
            threshold: self.threshold,
            record_len: self.record_len,
            grid_step: self.grid_step,
        }
    }

    pub fn dimensionality_options(&self) -> DimensionalityOptions {
        let mut options = DimensionalityOptions::default();
        options.consistency = self.consistency_options();
        options.trials = self.trials;
        options.rank_tol = self.rank_tol;
        options.gamma_prefix_len = self.gamma_prefix_len;
        options
    }
}
