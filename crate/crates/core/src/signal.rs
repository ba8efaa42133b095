//! Piecewise-constant Boolean waveforms and their algebra.
//!
//! A waveform is stored as an initial value plus a sorted list of transition
//! timestamps, so logical combination and windowed distance integrals can be
//! evaluated exactly from the event times instead of on a sampling grid.
//! Timestamps are in nanoseconds.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// A piecewise-constant binary signal on `[0, horizon]`.
///
/// The value at time `t` is `initial_value` XOR the parity of the number of
/// transitions at or before `t`. Transitions are strictly increasing and all
/// lie in `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanWaveform {
    initial_value: bool,
    transitions: Vec<f64>,
    horizon: f64,
}

impl BooleanWaveform {
    /// Builds a waveform, validating the transition-list invariants.
    pub fn new(initial_value: bool, transitions: Vec<f64>, horizon: f64) -> Result<Self> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::domain(format!(
                "waveform horizon must be finite and non-negative, got {horizon}"
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &transitions {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::domain(format!(
                    "transition timestamp must be finite and non-negative, got {t}"
                )));
            }
            if t <= prev {
                return Err(Error::domain(format!(
                    "transitions must be strictly increasing ({prev} then {t})"
                )));
            }
            if t > horizon {
                return Err(Error::domain(format!(
                    "transition at {t} ns lies beyond the horizon {horizon} ns"
                )));
            }
            prev = t;
        }
        Ok(Self {
            initial_value,
            transitions,
            horizon,
        })
    }

    /// A waveform holding `value` over the whole `[0, horizon]` span.
    pub fn constant(value: bool, horizon: f64) -> Self {
        Self {
            initial_value: value,
            transitions: Vec::new(),
            horizon,
        }
    }

    pub fn initial_value(&self) -> bool {
        self.initial_value
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// The signal value at time `t`.
    ///
    /// A transition exactly at `t` is counted, so the value returned is the
    /// one holding on `[t, next transition)`.
    pub fn value_at(&self, t: f64) -> Result<bool> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!(
                "time {t} ns outside waveform domain [0, {}]",
                self.horizon
            )));
        }
        let crossed = self.transitions.partition_point(|&tau| tau <= t);
        Ok(self.initial_value ^ (crossed % 2 == 1))
    }

    /// The value the waveform holds at its horizon.
    pub fn final_value(&self) -> bool {
        self.initial_value ^ (self.transitions.len() % 2 == 1)
    }

    /// Pointwise logical complement (same transitions, flipped initial value).
    pub fn complement(&self) -> Self {
        Self {
            initial_value: !self.initial_value,
            transitions: self.transitions.clone(),
            horizon: self.horizon,
        }
    }

    /// Returns the same signal defined up to a later horizon.
    ///
    /// The value past the old horizon is the old final value, which is what a
    /// wire that simply stays put does.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        if horizon < self.horizon {
            return Err(Error::domain(format!(
                "cannot shrink horizon from {} to {horizon}",
                self.horizon
            )));
        }
        Ok(Self {
            initial_value: self.initial_value,
            transitions: self.transitions.clone(),
            horizon,
        })
    }

    /// Pointwise XOR of two waveforms with equal horizons.
    ///
    /// Transition lists are merged; a timestamp appearing in both inputs
    /// cancels, since both signals flip and the XOR does not.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.horizon != other.horizon {
            return Err(Error::domain(format!(
                "cannot XOR waveforms with different horizons ({} vs {})",
                self.horizon, other.horizon
            )));
        }
        let mut merged = Vec::with_capacity(self.transitions.len() + other.transitions.len());
        let (a, b) = (&self.transitions, &other.transitions);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] < b[j] {
                merged.push(a[i]);
                i += 1;
            } else if b[j] < a[i] {
                merged.push(b[j]);
                j += 1;
            } else {
                // Coincident transitions cancel.
                i += 1;
                j += 1;
            }
        }
        merged.extend_from_slice(&a[i..]);
        merged.extend_from_slice(&b[j..]);
        Ok(Self {
            initial_value: self.initial_value ^ other.initial_value,
            transitions: merged,
            horizon: self.horizon,
        })
    }

    /// Total time the signal is high on `[0, t]`, computed exactly.
    pub fn high_time_to(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!(
                "time {t} ns outside waveform domain [0, {}]",
                self.horizon
            )));
        }
        let mut acc = 0.0;
        let mut value = self.initial_value;
        let mut seg_start = 0.0;
        for &tau in &self.transitions {
            if tau > t {
                break;
            }
            if value {
                acc += tau - seg_start;
            }
            seg_start = tau;
            value = !value;
        }
        if value {
            acc += t - seg_start;
        }
        Ok(acc)
    }

    /// Normalized Boolean distance between two waveforms over `[t, t + tau]`:
    /// the fraction of that window on which the signals disagree, integrated
    /// exactly from the transition lists.
    pub fn boolean_distance(&self, other: &Self, t: f64, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::domain(format!(
                "distance window length must be positive, got {tau}"
            )));
        }
        if t < 0.0 || t + tau > self.horizon || t + tau > other.horizon {
            return Err(Error::domain(format!(
                "distance window [{t}, {}] exceeds a waveform horizon ({}, {})",
                t + tau,
                self.horizon,
                other.horizon
            )));
        }
        let diff = self.xor(other)?;
        let high = diff.high_time_to(t + tau)? - diff.high_time_to(t)?;
        Ok((high / tau).clamp(0.0, 1.0))
    }

    /// Boolean distance evaluated at many window start times in one pass.
    ///
    /// Equivalent to calling [`boolean_distance`](Self::boolean_distance) per
    /// start, but the XOR signal and its cumulative high-time are built once.
    pub fn distance_profile(&self, other: &Self, starts: &[f64], tau: f64) -> Result<Vec<f64>> {
        if tau <= 0.0 {
            return Err(Error::domain(format!(
                "distance window length must be positive, got {tau}"
            )));
        }
        let diff = self.xor(other)?;
        let cum = CumulativeHighTime::new(&diff);
        let mut out = Vec::with_capacity(starts.len());
        for &t in starts {
            if t < 0.0 || t + tau > self.horizon || t + tau > other.horizon {
                return Err(Error::domain(format!(
                    "distance window [{t}, {}] exceeds a waveform horizon",
                    t + tau
                )));
            }
            let high = cum.at(t + tau) - cum.at(t);
            out.push((high / tau).clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// Samples the waveform on a regular grid: `values[j] = value_at(start + j * period)`.
    pub fn sample(&self, start: f64, period: f64, count: usize) -> Result<SampleTrain> {
        if period <= 0.0 {
            return Err(Error::domain(format!(
                "sample period must be positive, got {period}"
            )));
        }
        if count == 0 {
            return Err(Error::domain("sample count must be at least 1".to_string()));
        }
        let last = start + (count - 1) as f64 * period;
        if start < 0.0 || last > self.horizon {
            return Err(Error::domain(format!(
                "sample grid [{start}, {last}] exceeds waveform domain [0, {}]",
                self.horizon
            )));
        }
        let mut values = Vec::with_capacity(count);
        let mut idx = 0usize;
        for j in 0..count {
            let t = start + j as f64 * period;
            while idx < self.transitions.len() && self.transitions[idx] <= t {
                idx += 1;
            }
            values.push(self.initial_value ^ (idx % 2 == 1));
        }
        Ok(SampleTrain {
            start,
            period,
            values,
        })
    }

    /// Serializes the waveform in the text dump format:
    /// `initial=` and `horizon=` header lines, then one `t=` line per transition.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "initial={}", u8::from(self.initial_value));
        let _ = writeln!(out, "horizon={}", self.horizon);
        for t in &self.transitions {
            let _ = writeln!(out, "t={t}");
        }
        out
    }

    /// Parses the text dump format produced by [`to_dump`](Self::to_dump).
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut initial = None;
        let mut horizon = None;
        let mut transitions = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            match key {
                "initial" => {
                    initial = Some(match value {
                        "0" => false,
                        "1" => true,
                        other => {
                            return Err(Error::parse(format!(
                                "line {}: initial must be 0 or 1, got {other:?}",
                                lineno + 1
                            )))
                        }
                    });
                }
                "horizon" => {
                    horizon = Some(value.parse::<f64>().map_err(|e| {
                        Error::parse(format!("line {}: bad horizon: {e}", lineno + 1))
                    })?);
                }
                "t" => {
                    transitions.push(value.parse::<f64>().map_err(|e| {
                        Error::parse(format!("line {}: bad transition time: {e}", lineno + 1))
                    })?);
                }
                other => {
                    return Err(Error::parse(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let initial = initial.ok_or_else(|| Error::parse("missing initial= line".to_string()))?;
        let horizon = horizon.ok_or_else(|| Error::parse("missing horizon= line".to_string()))?;
        Self::new(initial, transitions, horizon)
    }
}

/// Precomputed cumulative high-time of a waveform, for O(log n) window queries.
struct CumulativeHighTime<'a> {
    wave: &'a BooleanWaveform,
    /// `prefix[i]` = high time on `[0, transitions[i]]`.
    prefix: Vec<f64>,
}

impl<'a> CumulativeHighTime<'a> {
    fn new(wave: &'a BooleanWaveform) -> Self {
        let mut prefix = Vec::with_capacity(wave.transitions.len());
        let mut acc = 0.0;
        let mut value = wave.initial_value;
        let mut seg_start = 0.0;
        for &tau in &wave.transitions {
            if value {
                acc += tau - seg_start;
            }
            prefix.push(acc);
            seg_start = tau;
            value = !value;
        }
        Self { wave, prefix }
    }

    fn at(&self, t: f64) -> f64 {
        let k = self.wave.transitions.partition_point(|&tau| tau <= t);
        if k == 0 {
            return if self.wave.initial_value { t } else { 0.0 };
        }
        let base = self.prefix[k - 1];
        let value_after = self.wave.initial_value ^ (k % 2 == 1);
        if value_after {
            base + (t - self.wave.transitions[k - 1])
        } else {
            base
        }
    }
}

/// Bits read off a waveform on a regular sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrain {
    start: f64,
    period: f64,
    values: Vec<bool>,
}

impl SampleTrain {
    pub fn new(start: f64, period: f64, values: Vec<bool>) -> Result<Self> {
        if period <= 0.0 {
            return Err(Error::domain(format!(
                "sample period must be positive, got {period}"
            )));
        }
        if values.is_empty() {
            return Err(Error::domain("sample train must be non-empty".to_string()));
        }
        Ok(Self {
            start,
            period,
            values,
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Timestamp of sample `j`.
    pub fn time_of(&self, j: usize) -> f64 {
        self.start + j as f64 * self.period
    }

    /// Samples as 0.0/1.0, handy for building state matrices.
    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&b| f64::from(u8::from(b))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn wave(initial: bool, transitions: &[f64], horizon: f64) -> BooleanWaveform {
        BooleanWaveform::new(initial, transitions.to_vec(), horizon).unwrap()
    }

    #[test]
    fn value_at_no_transitions() {
        let w = wave(false, &[], 10.0);
        assert!(!w.value_at(5.0).unwrap());
    }

    #[test]
    fn value_at_counts_passed_transitions() {
        let w = wave(false, &[1.0, 3.0], 10.0);
        assert!(w.value_at(2.0).unwrap());
    }

    #[test]
    fn value_at_even_parity_restores_initial() {
        let w = wave(true, &[1.0, 3.0], 10.0);
        assert!(w.value_at(4.0).unwrap());
    }

    #[test]
    fn value_at_transition_boundary_counts() {
        let w = wave(false, &[1.0], 10.0);
        assert!(!w.value_at(0.999).unwrap());
        assert!(w.value_at(1.0).unwrap());
    }

    #[test]
    fn value_at_outside_domain_is_domain_error() {
        let w = wave(false, &[], 10.0);
        assert!(w.value_at(-0.1).is_err());
        assert!(w.value_at(10.1).is_err());
    }

    #[test]
    fn new_rejects_unsorted_and_out_of_range() {
        assert!(BooleanWaveform::new(false, vec![2.0, 1.0], 10.0).is_err());
        assert!(BooleanWaveform::new(false, vec![1.0, 1.0], 10.0).is_err());
        assert!(BooleanWaveform::new(false, vec![-1.0], 10.0).is_err());
        assert!(BooleanWaveform::new(false, vec![11.0], 10.0).is_err());
    }

    #[test]
    fn xor_with_self_is_constant_zero() {
        let w = wave(true, &[1.0, 2.5, 7.25], 10.0);
        let z = w.xor(&w).unwrap();
        assert!(!z.initial_value());
        assert!(z.transitions().is_empty());
    }

    #[test]
    fn xor_with_constant_zero_is_identity() {
        let w = wave(false, &[1.0, 4.0], 10.0);
        let z = BooleanWaveform::constant(false, 10.0);
        assert_eq!(z.xor(&w).unwrap(), w);
    }

    #[test]
    fn xor_pulse_example_matches_grid() {
        let a = wave(false, &[1.0], 10.0);
        let b = wave(false, &[2.0], 10.0);
        let x = a.xor(&b).unwrap();
        assert_eq!(x.transitions(), &[1.0, 2.0]);
        // Pointwise truth-table check on a 0.01 ns grid.
        let mut t = 0.0;
        while t <= 10.0 {
            let expect = a.value_at(t).unwrap() ^ b.value_at(t).unwrap();
            assert_eq!(x.value_at(t).unwrap(), expect, "mismatch at t={t}");
            t += 0.01;
        }
    }

    #[test]
    fn xor_mismatched_horizons_is_error() {
        let a = wave(false, &[], 10.0);
        let b = wave(false, &[], 11.0);
        assert!(a.xor(&b).is_err());
    }

    #[test]
    fn distance_to_self_is_zero() {
        let w = wave(false, &[3.0, 4.5, 9.0], 200.0);
        assert_eq!(w.boolean_distance(&w, 0.0, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_to_complement_is_one() {
        let w = wave(false, &[3.0, 4.5, 9.0], 200.0);
        let d = w.boolean_distance(&w.complement(), 50.0, 100.0).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_single_disagreement_window() {
        // Disagreement exactly on [10, 20) inside a 100 ns window.
        let a = wave(false, &[10.0], 100.0);
        let b = wave(false, &[20.0], 100.0);
        let d = a.boolean_distance(&b, 0.0, 100.0).unwrap();
        assert_abs_diff_eq!(d, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn distance_matches_grid_integration() {
        let a = wave(false, &[2.0, 3.7, 11.1, 40.0], 120.0);
        let b = wave(true, &[0.5, 9.0, 41.3], 120.0);
        let exact = a.boolean_distance(&b, 5.0, 100.0).unwrap();
        let step = 0.01;
        let mut acc = 0.0;
        let mut t = 5.0;
        while t < 105.0 {
            if a.value_at(t).unwrap() != b.value_at(t).unwrap() {
                acc += step;
            }
            t += step;
        }
        // Grid error is bounded by one step per transition in the window.
        assert_abs_diff_eq!(exact, acc / 100.0, epsilon = 8.0 * step / 100.0);
    }

    #[test]
    fn distance_window_beyond_horizon_is_error() {
        let w = wave(false, &[], 50.0);
        assert!(w.boolean_distance(&w, 0.0, 100.0).is_err());
    }

    #[test]
    fn distance_profile_matches_single_calls() {
        let a = wave(false, &[2.0, 3.7, 11.1, 40.0, 77.7], 300.0);
        let b = wave(false, &[0.5, 9.0, 41.3, 200.0], 300.0);
        let starts: Vec<f64> = (0..80).map(|k| k as f64 * 2.5).collect();
        let profile = a.distance_profile(&b, &starts, 100.0).unwrap();
        for (k, &t) in starts.iter().enumerate() {
            let single = a.boolean_distance(&b, t, 100.0).unwrap();
            assert_abs_diff_eq!(profile[k], single, epsilon = 1e-12);
        }
    }

    #[test]
    fn sample_constant_zero() {
        let w = BooleanWaveform::constant(false, 100.0);
        let s = w.sample(0.0, 2.5, 10).unwrap();
        assert!(s.values().iter().all(|&b| !b));
    }

    #[test]
    fn sample_transition_between_grid_points() {
        let w = wave(false, &[2.6], 100.0);
        let s = w.sample(0.0, 2.5, 3).unwrap();
        assert_eq!(s.values(), &[false, false, true]);
    }

    #[test]
    fn sample_out_of_horizon_is_error() {
        let w = wave(false, &[], 10.0);
        assert!(w.sample(0.0, 2.5, 6).is_err());
    }

    #[test]
    fn dump_round_trip_is_lossless() {
        let w = wave(true, &[0.1234567890123, 2.5, 97.000000001], 100.5);
        let parsed = BooleanWaveform::from_dump(&w.to_dump()).unwrap();
        assert_eq!(parsed, w);
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(BooleanWaveform::from_dump("initial=2\nhorizon=5").is_err());
        assert!(BooleanWaveform::from_dump("horizon=5").is_err());
        assert!(BooleanWaveform::from_dump("initial=0\nhorizon=5\nt=abc").is_err());
        assert!(BooleanWaveform::from_dump("initial=0\nhorizon=5\nx=1").is_err());
    }
}
