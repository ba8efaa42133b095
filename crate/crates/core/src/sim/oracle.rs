//! Dense-grid reference implementation of the node dynamics.
//!
//! A brute-force synchronous sweep over a fixed time grid, sharing no
//! machinery with the event engine: delays are rounded to whole grid steps,
//! the delay equation is evaluated array-style, and pulse rejection runs on
//! candidate transition indices. Only used by tests as an independent check.

use super::ReservoirConfig;
use crate::error::{Error, Result};
use crate::signal::{BooleanWaveform, SampleTrain};
use std::collections::VecDeque;

/// Evaluates the delay equation on a `grid_step` grid over `[0, horizon]`.
///
/// Requires `jitter_sigma = 0`; the oracle is deterministic by construction.
/// Input transitions near the end of the horizon may be filtered differently
/// from the event engine (the sweep cannot see past the horizon), so
/// comparisons should use inputs that go quiet before `horizon`.
pub fn simulate_dense_oracle(
    config: &ReservoirConfig,
    input: &BooleanWaveform,
    horizon: f64,
    grid_step: f64,
) -> Result<SampleTrain> {
    config.validate()?;
    if grid_step <= 0.0 || !grid_step.is_finite() {
        return Err(Error::domain(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    if config.jitter_sigma != 0.0 {
        return Err(Error::domain(
            "the dense-grid oracle only models jitter-free dynamics".to_string(),
        ));
    }
    if input.horizon() < horizon {
        return Err(Error::domain(format!(
            "input waveform ends at {} ns, before the horizon {horizon} ns",
            input.horizon()
        )));
    }

    let n = (horizon / grid_step + 1e-9).floor() as usize + 1;
    let g_steps = (config.gate_delay / grid_step).round() as usize;
    let d1_steps = (config.line1.total_delay() / grid_step).round() as usize;
    let d2_steps = (config.line2.total_delay() / grid_step).round() as usize;
    let w = config.pulse_reject_width;

    let input_bits = input.sample(0.0, grid_step, n)?;
    let input_bits = input_bits.values();

    // Committed (post-filter) transition indices, in order; the feedback taps
    // read their parity at fixed lags via monotone cursors.
    let mut committed: Vec<usize> = Vec::new();
    let mut pending: VecDeque<usize> = VecDeque::new();
    let mut cursor1 = 0usize; // committed[..cursor1] are ≤ k − g − d1
    let mut cursor2 = 0usize;
    let mut prev_cand = false;

    for k in 0..n {
        // Transitions old enough that no later candidate can annihilate them
        // become part of the filtered output.
        while let Some(&a) = pending.front() {
            if (k - a) as f64 * grid_step >= w {
                committed.push(a);
                pending.pop_front();
            } else {
                break;
            }
        }

        let tap = |cursor: &mut usize, lag: usize| -> bool {
            if k < g_steps + lag {
                return false;
            }
            let j = k - g_steps - lag;
            while *cursor < committed.len() && committed[*cursor] <= j {
                *cursor += 1;
            }
            *cursor % 2 == 1
        };
        let data = if k < g_steps {
            false
        } else {
            input_bits[k - g_steps]
        };
        let cand = data ^ tap(&mut cursor1, d1_steps) ^ tap(&mut cursor2, d2_steps);

        if cand != prev_cand {
            pending.push_back(k);
            while pending.len() >= 2 {
                let b = pending[pending.len() - 1];
                let a = pending[pending.len() - 2];
                if (b - a) as f64 * grid_step < w {
                    pending.pop_back();
                    pending.pop_back();
                } else {
                    break;
                }
            }
            prev_cand = cand;
        }
    }
    // Nothing after the horizon can annihilate the stragglers.
    committed.extend(pending.drain(..));

    let mut values = vec![false; n];
    let mut level = false;
    let mut next = committed.iter().peekable();
    for (k, slot) in values.iter_mut().enumerate() {
        while next.peek().is_some_and(|&&a| a == k) {
            level = !level;
            next.next();
        }
        *slot = level;
    }
    SampleTrain::new(0.0, grid_step, values)
}

/// Counts grid points where the engine output and the oracle train disagree,
/// ignoring points within one grid step of a transition of either signal
/// (delay rounding legitimately shifts edges by a fraction of a step).
pub fn grid_mismatches(output: &BooleanWaveform, oracle: &SampleTrain) -> Result<usize> {
    let step = oracle.period();
    let n = oracle.len();
    let sampled = output.sample(oracle.start(), step, n)?;
    let sampled = sampled.values();
    let oracle_values = oracle.values();

    // Transition times of both signals, merged.
    let mut edges: Vec<f64> = output.transitions().to_vec();
    for k in 1..n {
        if oracle_values[k] != oracle_values[k - 1] {
            edges.push(oracle.time_of(k));
        }
    }
    edges.sort_by(f64::total_cmp);

    let mut mismatches = 0usize;
    for k in 0..n {
        if sampled[k] == oracle_values[k] {
            continue;
        }
        let t = oracle.time_of(k);
        let i = edges.partition_point(|&e| e < t - step - 1e-12);
        let near_edge = edges.get(i).is_some_and(|&e| e <= t + step + 1e-12);
        if !near_edge {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}
