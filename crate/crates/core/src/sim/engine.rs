//! Discrete-event simulation of the XOR node.
//!
//! The node output obeys the Boolean delay equation
//! `x(t) = data(t−g) ⊕ x(t−g−T₁′) ⊕ x(t−g−T₂′)` with `g` the gate delay and
//! `Tᵢ′` the jittered line traversal times, followed by removal of output
//! pulses narrower than the rejection width.
//!
//! Implementation outline: a future-event queue holds gate-input changes
//! (data edges, feedback arrivals) and commit checks. Whenever a gate input
//! flips, the 3-input XOR is recomputed once per timestamp; a changed result
//! schedules a provisional output transition `gate_delay` later. Provisional
//! transitions sit in a FIFO where consecutive pairs closer than the
//! rejection width annihilate (transitively, newest first). A transition
//! becomes definitive — appended to the output record and re-injected into
//! both delay lines — only once the clock passes its creation time plus the
//! rejection width, at which point no future partner can annihilate it.

use super::ReservoirConfig;
use crate::error::{Error, Result};
use crate::seeds::{self, purpose};
use crate::signal::BooleanWaveform;
use rand_distr::{Distribution, Normal};
use std::collections::{BinaryHeap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    /// The data input flips at the gate pin.
    DataToggle,
    /// A fed-back output transition arrives from line 1 or 2.
    FbToggle(u8),
    /// The provisional transition with this id is old enough to commit.
    CommitCheck(u64),
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

// Reversed ordering so the max-heap pops the earliest (time, seq) first.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Event {}

/// Run diagnostics, mostly for tests and budget tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    /// Events popped from the queue.
    pub events_processed: u64,
    /// Output transitions that survived pulse rejection.
    pub committed_transitions: u64,
    /// Output transitions removed by pulse rejection.
    pub annihilated_transitions: u64,
    /// Timestamp of the last processed event; `0` if none fired.
    pub last_event_time: f64,
}

/// Simulates the node on `[0, horizon]` and returns the output waveform.
///
/// The system starts at the all-zero fixed point: output 0, all-zero
/// delay-line history, data pin at the input's value at `t = 0`.
/// With `jitter_sigma = 0` the run is fully deterministic; otherwise it is
/// deterministic per `rng_seed`.
pub fn simulate(
    config: &ReservoirConfig,
    input: &BooleanWaveform,
    horizon: f64,
) -> Result<BooleanWaveform> {
    simulate_with_stats(config, input, horizon).map(|(wave, _)| wave)
}

/// [`simulate`] plus run diagnostics.
pub fn simulate_with_stats(
    config: &ReservoirConfig,
    input: &BooleanWaveform,
    horizon: f64,
) -> Result<(BooleanWaveform, SimStats)> {
    config.validate()?;
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(Error::domain(format!(
            "horizon must be finite and non-negative, got {horizon}"
        )));
    }
    if input.horizon() < horizon {
        return Err(Error::domain(format!(
            "input waveform ends at {} ns, before the simulation horizon {horizon} ns",
            input.horizon()
        )));
    }

    let g = config.gate_delay;
    let w = config.pulse_reject_width;
    let (t1, t2) = (config.line1.total_delay(), config.line2.total_delay());
    // Feedback re-entry can never beat the filter or the present batch.
    let min_traversal = w.max(1e-6);

    let mut rng = seeds::rng(config.rng_seed, &[purpose::JITTER]);
    let jitter = if config.jitter_sigma > 0.0 {
        let sig1 = config.jitter_sigma * (config.line1.element_count() as f64).sqrt();
        let sig2 = config.jitter_sigma * (config.line2.element_count() as f64).sqrt();
        Some((
            Normal::new(0.0, sig1).map_err(|e| Error::domain(e.to_string()))?,
            Normal::new(0.0, sig2).map_err(|e| Error::domain(e.to_string()))?,
        ))
    } else {
        None
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let push = |heap: &mut BinaryHeap<Event>, seq: &mut u64, time: f64, kind: EventKind| {
        *seq += 1;
        heap.push(Event {
            time,
            seq: *seq,
            kind,
        });
    };

    // Transitions later than `stop_time` cannot change the recorded output,
    // not even by annihilating a recorded transition.
    let stop_time = horizon + w;
    if input.value_at(0.0)? {
        push(&mut heap, &mut seq, 0.0, EventKind::DataToggle);
    }
    for &tau in input.transitions() {
        if tau > 0.0 && tau <= stop_time.min(input.horizon()) {
            push(&mut heap, &mut seq, tau, EventKind::DataToggle);
        }
    }

    // Gate pins: data, feedback 1, feedback 2. All-zero start.
    let mut pins = [false; 3];
    // Output value after every provisional transition is applied.
    let mut scheduled_final = false;
    // Provisional output transitions: (id, time), times strictly increasing.
    let mut pending: VecDeque<(u64, f64)> = VecDeque::new();
    let mut next_id = 0u64;
    let mut committed: Vec<f64> = Vec::new();
    let mut stats = SimStats {
        events_processed: 0,
        committed_transitions: 0,
        annihilated_transitions: 0,
        last_event_time: 0.0,
    };

    let mut batch = Vec::new();
    let mut commit_ids = Vec::new();
    while let Some(head) = heap.pop() {
        if head.time > stop_time {
            break;
        }
        let now = head.time;
        batch.clear();
        batch.push(head);
        while heap.peek().is_some_and(|e| e.time == now) {
            batch.push(heap.pop().expect("peeked event present"));
        }

        stats.events_processed += batch.len() as u64;
        if stats.events_processed > config.max_events {
            return Err(Error::Resource(format!(
                "event budget of {} exceeded at t = {now} ns; runaway oscillation \
                 (raise max_events or the pulse rejection width)",
                config.max_events
            )));
        }
        stats.last_event_time = now;

        // Input updates first, then a single output recomputation.
        let mut dirty = false;
        commit_ids.clear();
        for ev in batch.drain(..) {
            match ev.kind {
                EventKind::DataToggle => {
                    pins[0] = !pins[0];
                    dirty = true;
                }
                EventKind::FbToggle(line) => {
                    pins[line as usize] = !pins[line as usize];
                    dirty = true;
                }
                EventKind::CommitCheck(id) => commit_ids.push(id),
            }
        }

        if dirty {
            let new_x = pins[0] ^ pins[1] ^ pins[2];
            if new_x != scheduled_final {
                scheduled_final = new_x;
                let tau = now + g;
                if pending.back().is_some_and(|&(_, t)| t == tau) {
                    // A zero-width pulse at the same instant: the pair cancels
                    // outright. (Reachable only through degenerate schedules.)
                    pending.pop_back();
                    stats.annihilated_transitions += 2;
                } else {
                    next_id += 1;
                    pending.push_back((next_id, tau));
                    push(&mut heap, &mut seq, tau + w, EventKind::CommitCheck(next_id));
                    // Annihilate newest-first while the tail pair is too close.
                    while pending.len() >= 2 {
                        let b = pending[pending.len() - 1].1;
                        let a = pending[pending.len() - 2].1;
                        if b - a < w {
                            pending.pop_back();
                            pending.pop_back();
                            stats.annihilated_transitions += 2;
                        } else {
                            break;
                        }
                    }
                }
            }
        }

        for &id in &commit_ids {
            // Ids enter pending in order and leave from the front in order, so
            // a surviving id is at the front when its check fires; anything
            // else means it was annihilated.
            if pending.front().is_some_and(|&(front_id, _)| front_id == id) {
                let (_, tau) = pending.pop_front().expect("checked front");
                committed.push(tau);
                stats.committed_transitions += 1;
                let (j1, j2) = match &jitter {
                    Some((n1, n2)) => (n1.sample(&mut rng), n2.sample(&mut rng)),
                    None => (0.0, 0.0),
                };
                let arrive1 = tau + (t1 + j1).max(min_traversal);
                let arrive2 = tau + (t2 + j2).max(min_traversal);
                push(&mut heap, &mut seq, arrive1, EventKind::FbToggle(1));
                push(&mut heap, &mut seq, arrive2, EventKind::FbToggle(2));
            }
        }
    }

    committed.retain(|&tau| tau <= horizon);
    let wave = BooleanWaveform::new(false, committed, horizon)?;
    Ok((wave, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::delay::DelayLineSpec;

    /// Uniform-element line with the given total delay.
    fn line(total: f64, elements: usize) -> DelayLineSpec {
        DelayLineSpec::new(vec![total / elements as f64; elements]).unwrap()
    }

    /// Deterministic config: no jitter, default rejection width.
    fn quiet_config(t1: f64, t2: f64) -> ReservoirConfig {
        let mut cfg = ReservoirConfig::new(line(t1, 7), line(t2, 7), 0);
        cfg.jitter_sigma = 0.0;
        cfg
    }

    #[test]
    fn constant_zero_input_stays_at_fixed_point() {
        let cfg = quiet_config(3.76, 3.75);
        let input = BooleanWaveform::constant(false, 500.0);
        let (out, stats) = simulate_with_stats(&cfg, &input, 500.0).unwrap();
        assert!(!out.initial_value());
        assert!(out.transitions().is_empty());
        assert_eq!(stats.events_processed, 0);
    }

    #[test]
    fn step_input_settles_at_all_ones_fixed_point() {
        // Near-equal line delays: the brief XOR(1,0,1) glitch between the two
        // feedback arrivals is narrower than the rejection width and vanishes.
        let cfg = quiet_config(3.76, 3.75);
        let input = BooleanWaveform::new(false, vec![0.0], 500.0).unwrap();
        let (out, stats) = simulate_with_stats(&cfg, &input, 500.0).unwrap();
        assert_eq!(out.transitions(), &[0.0]);
        assert!(out.final_value());
        // Settled: nothing fires after the first feedback round trip plus
        // the commit-check delay.
        assert!(stats.last_event_time <= 4.5);
        assert_eq!(stats.committed_transitions, 1);
        assert_eq!(stats.annihilated_transitions, 2);
    }

    #[test]
    fn late_step_settles_too() {
        let cfg = quiet_config(4.31, 4.31);
        let input = BooleanWaveform::new(false, vec![10.0], 300.0).unwrap();
        let (out, stats) = simulate_with_stats(&cfg, &input, 300.0).unwrap();
        assert_eq!(out.transitions(), &[10.0]);
        assert!(stats.last_event_time <= 15.0);
    }

    #[test]
    fn single_pulse_produces_activity() {
        // Unequal lines: with near-equal delays every echo pair lands within
        // the rejection width and the response dies immediately.
        let cfg = quiet_config(3.76, 5.79);
        let input = BooleanWaveform::new(false, vec![0.0, 2.5], 100.0).unwrap();
        let out = simulate(&cfg, &input, 100.0).unwrap();
        assert!(out.transitions().len() > 2, "feedback should echo the pulse");
    }

    #[test]
    fn committed_transitions_respect_rejection_width() {
        let mut cfg = quiet_config(3.76, 5.79);
        cfg.jitter_sigma = 0.01;
        cfg.rng_seed = 7;
        let input = BooleanWaveform::new(false, vec![0.0, 2.5, 5.0, 7.5], 400.0).unwrap();
        let out = simulate(&cfg, &input, 400.0).unwrap();
        for pair in out.transitions().windows(2) {
            assert!(
                pair[1] - pair[0] >= cfg.pulse_reject_width - 1e-9,
                "pulse narrower than the rejection width survived: {} then {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_identical_waveforms() {
        let mut cfg = quiet_config(3.76, 5.79);
        cfg.jitter_sigma = 0.005;
        cfg.rng_seed = 42;
        let input = BooleanWaveform::new(false, vec![0.0, 2.5, 5.0], 600.0).unwrap();
        let a = simulate(&cfg, &input, 600.0).unwrap();
        let b = simulate(&cfg, &input, 600.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_diverge_under_jitter() {
        let mut cfg = quiet_config(3.76, 5.79);
        cfg.jitter_sigma = 0.005;
        let input = BooleanWaveform::new(false, vec![0.0, 2.5, 5.0], 600.0).unwrap();
        let a = simulate(&cfg.with_seed(1), &input, 600.0).unwrap();
        let b = simulate(&cfg.with_seed(2), &input, 600.0).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_jitter_flipped_bit_changes_output() {
        // Maximal sensitivity: with the filter off, flipping one input bit
        // must change the transient.
        let mut cfg = quiet_config(3.76, 3.75);
        cfg.pulse_reject_width = 0.0;
        let word01 = BooleanWaveform::new(false, vec![0.0, 2.5], 60.0).unwrap();
        let word11 = BooleanWaveform::new(false, vec![0.0], 60.0).unwrap();
        let a = simulate(&cfg, &word01, 60.0).unwrap();
        let b = simulate(&cfg, &word11, 60.0).unwrap();
        let d = a.boolean_distance(&b, 0.0, 50.0).unwrap();
        assert!(d > 0.0, "single-bit flip left the transient unchanged");
    }

    #[test]
    fn event_budget_overflow_is_resource_error() {
        let mut cfg = quiet_config(3.76, 3.75);
        cfg.pulse_reject_width = 0.0;
        cfg.max_events = 200;
        let input = BooleanWaveform::new(false, vec![0.0, 2.5], 300.0).unwrap();
        let err = simulate(&cfg, &input, 300.0).unwrap_err();
        assert!(matches!(err, Error::Resource(_)), "got {err:?}");
    }

    #[test]
    fn rejection_width_wider_than_lines_is_domain_error() {
        let mut cfg = quiet_config(3.76, 3.75);
        cfg.pulse_reject_width = 3.75;
        let input = BooleanWaveform::constant(false, 10.0);
        assert!(matches!(
            simulate(&cfg, &input, 10.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn input_shorter_than_horizon_is_domain_error() {
        let cfg = quiet_config(3.76, 3.75);
        let input = BooleanWaveform::constant(false, 10.0);
        assert!(simulate(&cfg, &input, 20.0).is_err());
    }

    #[test]
    fn shifted_input_shifts_output_exactly() {
        // No jitter makes the node time-invariant: delaying the stimulus by
        // one bit period delays the whole transient by the same amount.
        let cfg = quiet_config(9.75, 10.25);
        let early = BooleanWaveform::new(false, vec![2.5, 5.0], 200.0).unwrap();
        let late = BooleanWaveform::new(false, vec![5.0, 7.5], 200.0).unwrap();
        let out_early = simulate(&cfg, &early, 200.0).unwrap();
        let out_late = simulate(&cfg, &late, 200.0).unwrap();
        let shifted: Vec<f64> = out_early
            .transitions()
            .iter()
            .map(|&t| t + 2.5)
            .filter(|&t| t <= 200.0 - 2.5)
            .collect();
        let clipped: Vec<f64> = out_late
            .transitions()
            .iter()
            .copied()
            .filter(|&t| t <= 200.0 - 2.5)
            .collect();
        assert_eq!(shifted.len(), clipped.len());
        for (a, b) in shifted.iter().zip(&clipped) {
            assert!((a - b).abs() < 1e-9, "shift mismatch: {a} vs {b}");
        }
    }
}
