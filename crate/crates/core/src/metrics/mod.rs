//! Consistency windows, divergence slopes, and rank-based dimensionality.

mod rank;

pub use rank::{
    effective_dimensionality, generalization_ability, kernel_quality, DimensionalityOptions,
    DimensionalityResult, GammaLayout, StateMatrix,
};

use crate::error::{Error, Result};
use crate::readout::{encode, InputWord};
use crate::seeds::{self, purpose};
use crate::signal::BooleanWaveform;
use crate::sim::{simulate, ReservoirConfig};
use rayon::prelude::*;

/// Parameters of a consistency estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyOptions {
    /// Distance integration window, ns.
    pub tau: f64,
    /// Fraction of the cross-input distance level at which the self-distance
    /// counts as converged.
    pub threshold: f64,
    /// Simulated record length per trial, ns.
    pub record_len: f64,
    /// Spacing of the window start times, ns.
    pub grid_step: f64,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        Self {
            tau: 100.0,
            threshold: 0.9,
            record_len: 600.0,
            grid_step: 2.5,
        }
    }
}

impl ConsistencyOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::domain(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::domain(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(Error::domain(format!(
                "grid step must be positive, got {}",
                self.grid_step
            )));
        }
        if self.record_len < self.tau + self.grid_step {
            return Err(Error::domain(format!(
                "record length {} ns leaves no room for a {} ns distance window",
                self.record_len, self.tau
            )));
        }
        Ok(())
    }
}

/// Distance curves and the consistency window extracted from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Window start times, ns.
    pub starts: Vec<f64>,
    /// Per input: mean distance between repeated runs of that input.
    pub d_ii: Vec<Vec<f64>>,
    /// Per input pair (i < j): mean distance between runs of different inputs.
    pub d_ij: Vec<Vec<f64>>,
    /// Which input pair each `d_ij` row belongs to.
    pub d_ij_labels: Vec<(usize, usize)>,
    /// Consistency window length L, ns.
    pub window_l: f64,
    /// Mean least-squares slope of `ln d_ii` over the divergence region, 1/ns.
    /// `NaN` when no fit region exists.
    pub lyapunov_slope: f64,
    /// Set when no input's self-distance ever converges to the cross level;
    /// `window_l` then equals the record length.
    pub degenerate: bool,
}

impl ConsistencyReport {
    /// Mean of the cross-input distance curves.
    pub fn mean_cross_curve(&self) -> Vec<f64> {
        mean_rows(&self.d_ij)
    }
}

/// Runs repeated trials of each input and reduces them to distance curves.
///
/// Trial `r` of input `i` uses the jitter seed derived from
/// `config.rng_seed` and `(i, r)`, so the estimate is reproducible and
/// independent of scheduling.
pub fn estimate_consistency(
    config: &ReservoirConfig,
    inputs: &[InputWord],
    trials: usize,
    options: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    let runs = consistency_runs(config, inputs, trials, options)?;
    consistency_from_runs(&runs, options)
}

/// The raw per-input trial waveforms behind [`estimate_consistency`].
pub fn consistency_runs(
    config: &ReservoirConfig,
    inputs: &[InputWord],
    trials: usize,
    options: &ConsistencyOptions,
) -> Result<Vec<Vec<BooleanWaveform>>> {
    options.validate()?;
    config.validate()?;
    if trials < 2 {
        return Err(Error::domain(format!(
            "need at least 2 trials per input, got {trials}"
        )));
    }
    if inputs.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 distinct inputs, got {}",
            inputs.len()
        )));
    }
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            if inputs[i] == inputs[j] {
                return Err(Error::domain(format!(
                    "inputs {i} and {j} are identical; inputs must be pairwise distinct"
                )));
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..inputs.len())
        .flat_map(|i| (0..trials).map(move |r| (i, r)))
        .collect();
    let waves: Vec<BooleanWaveform> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let wave = encode(&inputs[i], options.record_len)?;
            let seed = seeds::derive(
                config.rng_seed,
                &[purpose::PROBE_INPUT, i as u64, r as u64],
            );
            simulate(&config.with_seed(seed), &wave, options.record_len)
        })
        .collect::<Result<_>>()?;
    Ok(waves.chunks(trials).map(<[_]>::to_vec).collect())
}

/// Reduces per-input trial waveforms to distance curves, the consistency
/// window, and the divergence slope.
pub fn consistency_from_runs(
    runs: &[Vec<BooleanWaveform>],
    options: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    options.validate()?;
    if runs.len() < 2 {
        return Err(Error::domain("need trials for at least 2 inputs".to_string()));
    }
    let trials = runs[0].len();
    if trials < 2 || runs.iter().any(|r| r.len() != trials) {
        return Err(Error::domain(
            "every input needs the same number (≥ 2) of trials".to_string(),
        ));
    }
    let horizon = runs[0][0].horizon();
    if runs
        .iter()
        .flatten()
        .any(|wave| wave.horizon() != horizon)
    {
        return Err(Error::domain(
            "trial waveforms must share one horizon".to_string(),
        ));
    }
    if horizon < options.tau + options.grid_step {
        return Err(Error::domain(format!(
            "records of {horizon} ns leave no room for a {} ns window",
            options.tau
        )));
    }

    let mut starts = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * options.grid_step;
        if t + options.tau > horizon + 1e-9 {
            break;
        }
        starts.push(t);
        k += 1;
    }

    // Mean self-distance curve per input, over all unordered trial pairs.
    let d_ii: Vec<Vec<f64>> = runs
        .par_iter()
        .map(|trial_waves| {
            let pairs: Vec<(usize, usize)> = (0..trials)
                .flat_map(|r| ((r + 1)..trials).map(move |s| (r, s)))
                .collect();
            mean_pair_profiles(trial_waves, trial_waves, &pairs, &starts, options.tau)
        })
        .collect::<Result<_>>()?;

    // Mean cross-distance curve per input pair, over all ordered trial pairs.
    let d_ij_labels: Vec<(usize, usize)> = (0..runs.len())
        .flat_map(|i| ((i + 1)..runs.len()).map(move |j| (i, j)))
        .collect();
    let d_ij: Vec<Vec<f64>> = d_ij_labels
        .par_iter()
        .map(|&(i, j)| {
            let pairs: Vec<(usize, usize)> = (0..trials)
                .flat_map(|r| (0..trials).map(move |s| (r, s)))
                .collect();
            mean_pair_profiles(&runs[i], &runs[j], &pairs, &starts, options.tau)
        })
        .collect::<Result<_>>()?;

    let mean_cross = mean_rows(&d_ij);
    let all_self_zero = d_ii.iter().flatten().all(|&d| d == 0.0);

    // Earliest start where each input's self-distance reaches the threshold
    // fraction of the cross level.
    let crossing_index = |curve: &[f64]| -> Option<usize> {
        curve
            .iter()
            .zip(&mean_cross)
            .position(|(&d, &c)| d >= options.threshold * c)
    };
    let crossings: Vec<Option<usize>> = if all_self_zero {
        vec![None; d_ii.len()]
    } else {
        d_ii.iter().map(|c| crossing_index(c)).collect()
    };
    let (window_l, degenerate) = match crossings.iter().flatten().min() {
        Some(&k) => (starts[k], false),
        None => (horizon, true),
    };

    let slopes: Vec<f64> = d_ii
        .iter()
        .zip(&crossings)
        .filter_map(|(curve, &crossing)| {
            divergence_slope(&starts, curve, crossing.unwrap_or(curve.len()))
        })
        .collect();
    let lyapunov_slope = if slopes.is_empty() {
        f64::NAN
    } else {
        slopes.iter().sum::<f64>() / slopes.len() as f64
    };

    Ok(ConsistencyReport {
        starts,
        d_ii,
        d_ij,
        d_ij_labels,
        window_l,
        lyapunov_slope,
        degenerate,
    })
}

/// Least-squares slope of `ln d(t)` over the divergence region: values above
/// twice the initial floor and below half the convergence level, up to the
/// crossing.
fn divergence_slope(starts: &[f64], curve: &[f64], crossing: usize) -> Option<f64> {
    let end = crossing.min(curve.len() - 1);
    let floor = curve[0];
    let converged = curve[end];
    let points: Vec<(f64, f64)> = (0..=end)
        .filter(|&k| curve[k] > 2.0 * floor && curve[k] < 0.5 * converged && curve[k] > 0.0)
        .map(|k| (starts[k], curve[k].ln()))
        .collect();
    linear_slope(&points)
}

/// Slope of the least-squares line through `points`; `None` below 2 points
/// or at zero time spread.
fn linear_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Mean distance profile over the listed `(index into a, index into b)` pairs.
fn mean_pair_profiles(
    a: &[BooleanWaveform],
    b: &[BooleanWaveform],
    pairs: &[(usize, usize)],
    starts: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    let profiles: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(r, s)| a[r].distance_profile(&b[s], starts, tau))
        .collect::<Result<_>>()?;
    Ok(mean_rows(&profiles))
}

fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut mean = vec![0.0; rows.first().map_or(0, Vec::len)];
    for row in rows {
        for (slot, &v) in mean.iter_mut().zip(row) {
            *slot += v;
        }
    }
    let n = rows.len() as f64;
    mean.iter_mut().for_each(|v| *v /= n);
    mean
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(initial: bool, transitions: &[f64]) -> BooleanWaveform {
        BooleanWaveform::new(initial, transitions.to_vec(), 600.0).unwrap()
    }

    /// Hand-built trial set: self-distances ramp up once the window slides
    /// past t = 155 ns; cross distances start at 1 and sag on the pairs that
    /// share the late flip.
    fn synthetic_runs() -> Vec<Vec<BooleanWaveform>> {
        vec![
            vec![wave(false, &[]), wave(false, &[155.0])],
            vec![wave(true, &[]), wave(true, &[155.0])],
        ]
    }

    #[test]
    fn synthetic_window_is_exactly_117_5() {
        // With f(t) = clamp((t + 100 − 155)/100, 0, 1):
        //   d_ii(t) = f(t) for both inputs; the four cross pairs average to
        //   1 − f(t)/2. The threshold crossing f ≥ 0.9·(1 − f/2) solves to
        //   f ≥ 18/29, i.e. t ≥ 117.07 → first 2.5 ns grid point 117.5.
        let report =
            consistency_from_runs(&synthetic_runs(), &ConsistencyOptions::default()).unwrap();
        assert_eq!(report.window_l, 117.5);
        assert!(!report.degenerate);
    }

    #[test]
    fn synthetic_curves_match_hand_integration() {
        let report =
            consistency_from_runs(&synthetic_runs(), &ConsistencyOptions::default()).unwrap();
        let f = |t: f64| ((t + 100.0 - 155.0) / 100.0).clamp(0.0, 1.0);
        for (k, &t) in report.starts.iter().enumerate() {
            assert!((report.d_ii[0][k] - f(t)).abs() < 1e-12);
            assert!((report.d_ii[1][k] - f(t)).abs() < 1e-12);
            let cross = report.mean_cross_curve()[k];
            assert!((cross - (1.0 - f(t) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_trials_are_degenerate() {
        let runs = vec![
            vec![wave(false, &[10.0, 20.0]); 3],
            vec![wave(false, &[12.5, 30.0]); 3],
        ];
        let report = consistency_from_runs(&runs, &ConsistencyOptions::default()).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.window_l, 600.0);
        assert!(report.d_ii.iter().flatten().all(|&d| d == 0.0));
        assert!(report.lyapunov_slope.is_nan());
    }

    #[test]
    fn curves_stay_in_unit_interval() {
        let report =
            consistency_from_runs(&synthetic_runs(), &ConsistencyOptions::default()).unwrap();
        for d in report.d_ii.iter().flatten().chain(report.d_ij.iter().flatten()) {
            assert!((0.0..=1.0).contains(d));
        }
    }

    #[test]
    fn rejects_undersized_trial_sets() {
        let opts = ConsistencyOptions::default();
        assert!(consistency_from_runs(&[], &opts).is_err());
        let one_input = vec![vec![wave(false, &[]), wave(false, &[1.0])]];
        assert!(consistency_from_runs(&one_input, &opts).is_err());
        let one_trial = vec![vec![wave(false, &[])], vec![wave(true, &[])]];
        assert!(consistency_from_runs(&one_trial, &opts).is_err());
    }

    #[test]
    fn rejects_bad_options() {
        let runs = synthetic_runs();
        let mut opts = ConsistencyOptions::default();
        opts.threshold = 1.0;
        assert!(consistency_from_runs(&runs, &opts).is_err());
        let mut opts = ConsistencyOptions::default();
        opts.tau = 0.0;
        assert!(consistency_from_runs(&runs, &opts).is_err());
        let mut opts = ConsistencyOptions::default();
        opts.record_len = 50.0;
        assert!(opts.validate().is_err());
    }

    #[test]
    fn divergence_slope_recovers_exponential_rate() {
        // d(t) = 1e-3·exp(0.05 t) capped at 1: the fit region excludes the
        // floor and the saturated top but sees the pure exponential ramp.
        let starts: Vec<f64> = (0..200).map(|k| k as f64 * 2.5).collect();
        let curve: Vec<f64> = starts
            .iter()
            .map(|&t| (1e-3 * (0.05 * t).exp()).min(1.0))
            .collect();
        let crossing = curve.iter().position(|&d| d >= 0.9).unwrap();
        let slope = divergence_slope(&starts, &curve, crossing).unwrap();
        assert!((slope - 0.05).abs() < 1e-6, "slope {slope}");
    }
}
