//! Delay-line models: calibrated totals, per-element heterogeneity.
//!
//! A delay line is a chain of `element_count` buffer elements. Individual
//! element delays vary with placement; the measured totals for each line at
//! each chain length live in a calibration table bundled with the crate.

use crate::error::{Error, Result};
use crate::seeds::{self, purpose};
use rand::Rng;
use std::fmt::Write as _;

/// Mean single-element delay in ns.
pub const ELEMENT_DELAY_MEAN_NS: f64 = 0.59;
/// Observed range of single-element delays in ns.
pub const ELEMENT_DELAY_MIN_NS: f64 = 0.43;
pub const ELEMENT_DELAY_MAX_NS: f64 = 0.99;

/// Which of the two feedback lines a calibration lookup refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineId {
    Line1,
    Line2,
}

/// How the per-element delays of a line are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayLineMode {
    /// Heterogeneous element delays rescaled so the total matches the
    /// calibration table entry for the element count exactly.
    TableCalibrated(LineId),
    /// Heterogeneous element delays drawn uniform on the observed range;
    /// the total is whatever they sum to.
    SampledHeterogeneous,
    /// Every element at the mean delay.
    Uniform,
}

/// A concrete delay line: per-element delays and their total.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLineSpec {
    element_delays: Vec<f64>,
    total_delay: f64,
}

impl DelayLineSpec {
    /// Builds a spec from explicit element delays.
    pub fn new(element_delays: Vec<f64>) -> Result<Self> {
        if element_delays.is_empty() {
            return Err(Error::domain(
                "delay line must have at least one element".to_string(),
            ));
        }
        for &d in &element_delays {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::domain(format!(
                    "element delays must be positive and finite, got {d}"
                )));
            }
        }
        let total_delay = element_delays.iter().sum();
        Ok(Self {
            element_delays,
            total_delay,
        })
    }

    pub fn element_count(&self) -> usize {
        self.element_delays.len()
    }

    pub fn element_delays(&self) -> &[f64] {
        &self.element_delays
    }

    /// Sum of the element delays, in ns.
    pub fn total_delay(&self) -> f64 {
        self.total_delay
    }
}

/// Measured line totals per element count, loadable from a plain text table.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    /// Rows sorted by strictly increasing element count.
    rows: Vec<(usize, f64, f64)>,
}

/// The calibration table shipped with the crate.
const BUNDLED_TABLE: &str = include_str!("../../data/delay_calibration.txt");

impl CalibrationTable {
    /// The measured table bundled with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TABLE).expect("bundled calibration table must parse")
    }

    /// Parses the text format: `N T1_ns T2_ns` per line, `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(n), Some(t1), Some(t2), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(format!(
                    "line {}: expected `N T1_ns T2_ns`, got {line:?}",
                    lineno + 1
                )));
            };
            let n: usize = n
                .parse()
                .map_err(|e| Error::parse(format!("line {}: bad element count: {e}", lineno + 1)))?;
            let t1: f64 = t1
                .parse()
                .map_err(|e| Error::parse(format!("line {}: bad T1: {e}", lineno + 1)))?;
            let t2: f64 = t2
                .parse()
                .map_err(|e| Error::parse(format!("line {}: bad T2: {e}", lineno + 1)))?;
            if t1 <= 0.0 || t2 <= 0.0 {
                return Err(Error::parse(format!(
                    "line {}: totals must be positive",
                    lineno + 1
                )));
            }
            rows.push((n, t1, t2));
        }
        for pair in rows.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::parse(format!(
                    "element counts must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if rows.is_empty() {
            return Err(Error::parse("calibration table is empty".to_string()));
        }
        Ok(Self { rows })
    }

    /// Serializes back to the text format.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for &(n, t1, t2) in &self.rows {
            let _ = writeln!(out, "{n} {t1} {t2}");
        }
        out
    }

    pub fn rows(&self) -> &[(usize, f64, f64)] {
        &self.rows
    }

    /// The measured total for `element_count` on the given line.
    pub fn total_for(&self, element_count: usize, line: LineId) -> Result<f64> {
        let row = self
            .rows
            .iter()
            .find(|&&(n, _, _)| n == element_count)
            .ok_or_else(|| {
                Error::Lookup(format!(
                    "no calibration row for element count {element_count}"
                ))
            })?;
        Ok(match line {
            LineId::Line1 => row.1,
            LineId::Line2 => row.2,
        })
    }
}

/// Constructs a delay line with `element_count` elements under the given mode.
///
/// Heterogeneous modes draw element delays uniform on the observed
/// `[0.43, 0.99]` ns range from a stream derived from `rng_seed`; the
/// table-calibrated mode then rescales them so the total matches the measured
/// value exactly.
pub fn build_delay_line(
    element_count: usize,
    mode: DelayLineMode,
    calibration: &CalibrationTable,
    rng_seed: u64,
) -> Result<DelayLineSpec> {
    if element_count < 1 {
        return Err(Error::domain(
            "delay line needs at least one element".to_string(),
        ));
    }
    let line_tag = match mode {
        DelayLineMode::TableCalibrated(LineId::Line1) => 1,
        DelayLineMode::TableCalibrated(LineId::Line2) => 2,
        _ => 0,
    };
    let sample_elements = |seed: u64| -> Vec<f64> {
        let mut rng = seeds::rng(seed, &[purpose::DELAY_SAMPLING, line_tag, element_count as u64]);
        (0..element_count)
            .map(|_| rng.random_range(ELEMENT_DELAY_MIN_NS..ELEMENT_DELAY_MAX_NS))
            .collect()
    };
    match mode {
        DelayLineMode::TableCalibrated(line) => {
            let target = calibration.total_for(element_count, line)?;
            let mut delays = sample_elements(rng_seed);
            let sum: f64 = delays.iter().sum();
            for d in &mut delays {
                *d *= target / sum;
            }
            // Pin the sum to the measured total exactly; rescaling leaves a
            // last-bit float residue.
            let partial: f64 = delays[..element_count - 1].iter().sum();
            delays[element_count - 1] = target - partial;
            DelayLineSpec::new(delays)
        }
        DelayLineMode::SampledHeterogeneous => DelayLineSpec::new(sample_elements(rng_seed)),
        DelayLineMode::Uniform => {
            DelayLineSpec::new(vec![ELEMENT_DELAY_MEAN_NS; element_count])
        }
    }
}
