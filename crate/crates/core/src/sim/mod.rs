//! Delay-line construction and the discrete-event simulator for the
//! XOR node with two delayed feedback lines.

pub mod delay;
mod engine;
mod oracle;

pub use delay::{build_delay_line, CalibrationTable, DelayLineMode, DelayLineSpec, LineId};
pub use engine::{simulate, simulate_with_stats, SimStats};
pub use oracle::{grid_mismatches, simulate_dense_oracle};

use crate::error::{Error, Result};

/// Per-element traversal jitter, ns. Calibrated jointly with the rejection
/// width so that table-calibrated lines lose consistency on the same
/// tens-to-hundreds-of-ns scale the hardware does: with the rejection width
/// inside the pulse-width distribution, jitter occasionally flips a
/// keep-or-annihilate decision for a marginal pulse, and each flip cascades
/// through the feedback lines. At this scale the 8/11-element reference
/// lines lose consistency near the middle of the reported range.
pub const DEFAULT_JITTER_SIGMA_NS: f64 = 0.03;
/// Shortest output pulse the node can launch, ns. Models the gate's finite
/// rise time; calibrated with the jitter default above — wide enough that a
/// meaningful fraction of echo pulses sits near the rejection boundary
/// (otherwise jitter never tips a decision and every run is identical),
/// narrow enough that echo pulses from unequal-length lines survive and
/// sustain the transient.
pub const DEFAULT_PULSE_REJECT_NS: f64 = 0.4;
/// Event budget guarding runaway oscillation.
pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;

/// Full parameterization of one reservoir instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    pub line1: DelayLineSpec,
    pub line2: DelayLineSpec,
    /// Gate propagation delay, ns. Zero by default; line totals absorb all
    /// measured propagation.
    pub gate_delay: f64,
    /// Jitter scale, ns: one feedback traversal of a line with `N` elements
    /// receives a Gaussian offset of standard deviation `jitter_sigma · √N`.
    pub jitter_sigma: f64,
    /// Output transitions closer together than this annihilate in pairs.
    pub pulse_reject_width: f64,
    /// Seed for the per-run jitter stream.
    pub rng_seed: u64,
    /// Event budget; exceeding it aborts the run with a resource error.
    pub max_events: u64,
}

impl ReservoirConfig {
    /// Config with default gate delay, jitter, rejection width, and budget.
    pub fn new(line1: DelayLineSpec, line2: DelayLineSpec, rng_seed: u64) -> Self {
        Self {
            line1,
            line2,
            gate_delay: 0.0,
            jitter_sigma: DEFAULT_JITTER_SIGMA_NS,
            pulse_reject_width: DEFAULT_PULSE_REJECT_NS,
            rng_seed,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    /// Same config with a different jitter seed; used to fan one reservoir
    /// out into independent trials.
    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gate_delay >= 0.0) || !self.gate_delay.is_finite() {
            return Err(Error::domain(format!(
                "gate delay must be finite and non-negative, got {}",
                self.gate_delay
            )));
        }
        if !(self.jitter_sigma >= 0.0) || !self.jitter_sigma.is_finite() {
            return Err(Error::domain(format!(
                "jitter sigma must be finite and non-negative, got {}",
                self.jitter_sigma
            )));
        }
        if !(self.pulse_reject_width >= 0.0) || !self.pulse_reject_width.is_finite() {
            return Err(Error::domain(format!(
                "pulse rejection width must be finite and non-negative, got {}",
                self.pulse_reject_width
            )));
        }
        let min_total = self.line1.total_delay().min(self.line2.total_delay());
        if self.pulse_reject_width >= min_total {
            return Err(Error::domain(format!(
                "pulse rejection width {} must stay below the shortest line delay {} \
                 or all feedback is annihilated",
                self.pulse_reject_width, min_total
            )));
        }
        if self.max_events == 0 {
            return Err(Error::domain("event budget must be positive".to_string()));
        }
        Ok(())
    }
}
