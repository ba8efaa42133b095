//! Windowed linear classifiers over sampled reservoir output.
//!
//! One classifier per (word, start-index) pair: a length-`window` weight
//! vector dotted with `window` consecutive 0/1 output samples. Training
//! solves ridge-regularized least squares against ±1 targets from labeled
//! runs; classification picks the word whose classifier scores highest.

use crate::error::{Error, Result};
use crate::readout::{encode, InputWord, BIT_PERIOD_NS};
use crate::seeds::{self, purpose};
use crate::signal::SampleTrain;
use crate::sim::{simulate, ReservoirConfig};
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

/// Samples collected per run (500 ns at the 400 MHz sampling clock).
pub const DEFAULT_SERIES_SAMPLES: usize = 200;
/// Samples combined by one classifier (125 ns).
pub const DEFAULT_CLASSIFY_WINDOW: usize = 50;
/// Ridge weight for the normal equations; repeated Boolean runs produce
/// rank-deficient sample matrices often enough that plain least squares is
/// not reliable.
pub const DEFAULT_RIDGE: f64 = 1e-6;
/// Word count cap: training cost scales as 2^n runs per trial.
pub const MAX_WORD_BITS: usize = 10;

/// One labeled record: the transmitted word index and the sampled output it
/// produced.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRun {
    pub word: usize,
    pub samples: SampleTrain,
}

/// Trained readout: for every word `i` and start index `j`, an independent
/// weight vector applied to samples `j..j+window`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSet {
    n_bits: usize,
    window: usize,
    sample_period: f64,
    /// Indexed `weights[word][start_index][k]`.
    weights: Vec<Vec<Vec<f64>>>,
    min_norm_fallback: bool,
}

impl ClassifierSet {
    /// Word length in bits.
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Number of distinct words (2^n_bits).
    pub fn word_count(&self) -> usize {
        self.weights.len()
    }

    /// Window length in samples.
    pub fn window(&self) -> usize {
        self.window
    }

    /// Sampling period, ns.
    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    /// Number of trained start indices.
    pub fn start_count(&self) -> usize {
        self.weights[0].len()
    }

    /// Timestamp of start index `j` on the training grid, ns.
    pub fn start_time(&self, j: usize) -> f64 {
        j as f64 * self.sample_period
    }

    /// True when at least one normal system was singular and training fell
    /// back to the minimum-norm least-squares solution.
    pub fn used_min_norm_fallback(&self) -> bool {
        self.min_norm_fallback
    }

    /// Weight vector of word `i`'s classifier at start index `j`.
    pub fn weights(&self, word: usize, start_index: usize) -> Result<&[f64]> {
        let per_word = self
            .weights
            .get(word)
            .ok_or_else(|| Error::Lookup(format!("no classifier for word index {word}")))?;
        per_word
            .get(start_index)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Lookup(format!("no classifier at start index {start_index}")))
    }

    /// Score of word `i`'s classifier at start index `j` on a sampled run.
    pub fn score(&self, word: usize, start_index: usize, samples: &SampleTrain) -> Result<f64> {
        let weights = self.weights(word, start_index)?;
        window_check(start_index, self.window, samples.len())?;
        let values = samples.values();
        Ok(weights
            .iter()
            .zip(&values[start_index..start_index + self.window])
            .map(|(w, &x)| w * f64::from(u8::from(x)))
            .sum())
    }

    /// Serializes to the documented text format: `key=value` header lines,
    /// then one `word start_index w_0 … w_{window-1}` line per classifier.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n_bits={}\n", self.n_bits));
        out.push_str(&format!("window={}\n", self.window));
        out.push_str(&format!("sample_period={}\n", self.sample_period));
        out.push_str(&format!("starts={}\n", self.start_count()));
        out.push_str(&format!("min_norm_fallback={}\n", self.min_norm_fallback));
        for (i, per_word) in self.weights.iter().enumerate() {
            for (j, w) in per_word.iter().enumerate() {
                out.push_str(&format!("{i} {j}"));
                for v in w {
                    out.push_str(&format!(" {v}"));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses the `to_text` format back; weight lines must appear in
    /// word-major order with contiguous indices.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n_bits: usize = header_field(&mut lines, "n_bits")?;
        let window: usize = header_field(&mut lines, "window")?;
        let sample_period: f64 = header_field(&mut lines, "sample_period")?;
        let starts: usize = header_field(&mut lines, "starts")?;
        let min_norm_fallback: bool = header_field(&mut lines, "min_norm_fallback")?;
        check_train_geometry(n_bits, window, starts + window)?;
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::parse(format!(
                "sample_period must be positive, got {sample_period}"
            )));
        }

        let words = 1usize << n_bits;
        let mut weights = vec![Vec::with_capacity(starts); words];
        for (i, expected_word) in (0..words).flat_map(|w| std::iter::repeat(w).take(starts)).enumerate() {
            let expected_start = i % starts;
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(format!("expected {} weight lines, got {i}", words * starts)))?;
            let mut fields = line.split_whitespace();
            let word: usize = parse_field(fields.next(), "word index")?;
            let start: usize = parse_field(fields.next(), "start index")?;
            if word != expected_word || start != expected_start {
                return Err(Error::parse(format!(
                    "weight line out of order: expected word {expected_word} start {expected_start}, got {word} {start}"
                )));
            }
            let w: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::parse(format!("bad weight {f:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if w.len() != window {
                return Err(Error::parse(format!(
                    "weight line for ({word}, {start}) has {} entries, expected {window}",
                    w.len()
                )));
            }
            weights[word].push(w);
        }
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(Error::parse(format!("unexpected trailing line {extra:?}")));
        }
        Ok(Self {
            n_bits,
            window,
            sample_period,
            weights,
            min_norm_fallback,
        })
    }
}

fn header_field<T: std::str::FromStr>(
    lines: &mut std::str::Lines<'_>,
    key: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let line = lines
        .next()
        .ok_or_else(|| Error::parse(format!("missing header line {key}=…")))?;
    let value = line
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::parse(format!("expected {key}=…, got {line:?}")))?;
    value
        .parse()
        .map_err(|e| Error::parse(format!("bad value for {key}: {e}")))
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let field = field.ok_or_else(|| Error::parse(format!("missing {what}")))?;
    field
        .parse()
        .map_err(|e| Error::parse(format!("bad {what} {field:?}: {e}")))
}

fn window_check(start_index: usize, window: usize, sample_count: usize) -> Result<()> {
    if start_index + window > sample_count {
        return Err(Error::domain(format!(
            "window [{start_index}, {}) exceeds the {sample_count} available samples",
            start_index + window
        )));
    }
    Ok(())
}

fn check_train_geometry(n_bits: usize, window: usize, series_samples: usize) -> Result<()> {
    if n_bits == 0 || n_bits > MAX_WORD_BITS {
        return Err(Error::domain(format!(
            "word length must be 1..={MAX_WORD_BITS} bits, got {n_bits}"
        )));
    }
    if window == 0 {
        return Err(Error::domain("window must be at least 1 sample".to_string()));
    }
    if window >= series_samples {
        return Err(Error::domain(format!(
            "window ({window} samples) must be shorter than the series ({series_samples} samples)"
        )));
    }
    Ok(())
}

/// Simulates `trials_per_word` labeled runs for every n-bit word, each
/// sampled every 2.5 ns from t = 0. `seed_tag` keeps training and test runs
/// on disjoint seed streams.
pub fn labeled_runs(
    config: &ReservoirConfig,
    n_bits: usize,
    trials_per_word: usize,
    series_samples: usize,
    seed_tag: u64,
) -> Result<Vec<LabeledRun>> {
    if trials_per_word == 0 {
        return Err(Error::domain("need at least 1 trial per word".to_string()));
    }
    let words = 1usize << n_bits;
    let horizon = series_samples as f64 * BIT_PERIOD_NS;
    let jobs: Vec<(usize, u64)> = (0..words)
        .flat_map(|w| (0..trials_per_word).map(move |t| (w, t as u64)))
        .collect();
    jobs.into_par_iter()
        .map(|(word, trial)| {
            let input = InputWord::from_index(word, n_bits)?;
            let wave = encode(&input, horizon)?;
            let seed = seeds::derive(config.rng_seed, &[seed_tag, word as u64, trial]);
            let out = simulate(&config.with_seed(seed), &wave, horizon)?;
            let samples = out.sample(0.0, BIT_PERIOD_NS, series_samples)?;
            Ok(LabeledRun { word, samples })
        })
        .collect()
}

/// Trains the full classifier set: simulates `trials_per_word` runs per
/// word, then solves one ridge regression per (word, start index).
pub fn train(
    config: &ReservoirConfig,
    n_bits: usize,
    trials_per_word: usize,
    series_samples: usize,
    window: usize,
    ridge: f64,
) -> Result<ClassifierSet> {
    check_train_geometry(n_bits, window, series_samples)?;
    let runs = labeled_runs(
        config,
        n_bits,
        trials_per_word,
        series_samples,
        purpose::TRAIN_SPLIT,
    )?;
    train_from_runs(&runs, n_bits, window, ridge)
}

/// Trains from pre-collected labeled runs. Regression target for word i's
/// classifier is +1 on runs of word i and −1 on all others; at ridge 0 a
/// singular normal system falls back to the minimum-norm solution and the
/// returned set is flagged.
pub fn train_from_runs(
    runs: &[LabeledRun],
    n_bits: usize,
    window: usize,
    ridge: f64,
) -> Result<ClassifierSet> {
    let (series_samples, sample_period) = validate_runs(runs, n_bits)?;
    check_train_geometry(n_bits, window, series_samples)?;
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::domain(format!(
            "ridge weight must be finite and non-negative, got {ridge}"
        )));
    }
    let words = 1usize << n_bits;
    let start_count = series_samples - window;
    let run_count = runs.len();

    let sample_rows: Vec<Vec<f64>> = runs.iter().map(|r| r.samples.as_f64()).collect();
    // Targets as a run_count × words matrix shared by every start index.
    let targets = DMatrix::from_fn(run_count, words, |r, i| {
        if runs[r].word == i {
            1.0
        } else {
            -1.0
        }
    });

    let per_start: Vec<(Vec<Vec<f64>>, bool)> = (0..start_count)
        .into_par_iter()
        .map(|j| solve_start_index(&sample_rows, &targets, j, window, ridge))
        .collect::<Result<_>>()?;

    let mut weights = vec![Vec::with_capacity(start_count); words];
    let mut min_norm_fallback = false;
    for (per_word, fell_back) in per_start {
        min_norm_fallback |= fell_back;
        for (i, w) in per_word.into_iter().enumerate() {
            weights[i].push(w);
        }
    }
    Ok(ClassifierSet {
        n_bits,
        window,
        sample_period,
        weights,
        min_norm_fallback,
    })
}

/// Solves the regression for every word at one start index. Returns the
/// per-word weight vectors and whether the minimum-norm fallback fired.
fn solve_start_index(
    sample_rows: &[Vec<f64>],
    targets: &DMatrix<f64>,
    j: usize,
    window: usize,
    ridge: f64,
) -> Result<(Vec<Vec<f64>>, bool)> {
    let run_count = sample_rows.len();
    let words = targets.ncols();
    let x = DMatrix::from_fn(run_count, window, |r, k| sample_rows[r][j + k]);
    let xty = x.transpose() * targets;
    let mut gram = x.transpose() * &x;
    for k in 0..window {
        gram[(k, k)] += ridge;
    }

    if let Some(chol) = Cholesky::new(gram) {
        let weights = (0..words)
            .map(|i| chol.solve(&DVector::from(xty.column(i).clone_owned())).data.into())
            .collect();
        return Ok((weights, false));
    }

    // Singular normal equations: least-squares via SVD of the sample matrix
    // itself, which yields the minimum-norm solution.
    let svd = x.svd(true, true);
    let eps = svd.singular_values.max() * f64::EPSILON * run_count.max(window) as f64;
    let weights = (0..words)
        .map(|i| {
            let y = DVector::from(targets.column(i).clone_owned());
            svd.solve(&y, eps)
                .map(|w| w.data.into())
                .map_err(|e| Error::domain(format!("least-squares solve failed: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok((weights, true))
}

fn validate_runs(runs: &[LabeledRun], n_bits: usize) -> Result<(usize, f64)> {
    if n_bits == 0 || n_bits > MAX_WORD_BITS {
        return Err(Error::domain(format!(
            "word length must be 1..={MAX_WORD_BITS} bits, got {n_bits}"
        )));
    }
    let first = runs
        .first()
        .ok_or_else(|| Error::domain("need at least one labeled run".to_string()))?;
    let series_samples = first.samples.len();
    let sample_period = first.samples.period();
    let words = 1usize << n_bits;
    for run in runs {
        if run.word >= words {
            return Err(Error::domain(format!(
                "run labeled with word {} but only {words} words exist",
                run.word
            )));
        }
        if run.samples.len() != series_samples || run.samples.period() != sample_period {
            return Err(Error::domain(
                "all labeled runs must share one sample grid".to_string(),
            ));
        }
    }
    Ok((series_samples, sample_period))
}

/// Classifies one run at one start index: the word whose classifier scores
/// highest, ties broken toward the lowest word index.
pub fn classify(set: &ClassifierSet, samples: &SampleTrain, start_index: usize) -> Result<usize> {
    if start_index >= set.start_count() {
        return Err(Error::Lookup(format!(
            "no classifier at start index {start_index}; trained {}",
            set.start_count()
        )));
    }
    window_check(start_index, set.window, samples.len())?;
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..set.word_count() {
        let score = set.score(i, start_index, samples)?;
        if score > best.0 {
            best = (score, i);
        }
    }
    Ok(best.1)
}

/// Time range a classifier window occupies relative to the consistency
/// window: fully inside, straddling the boundary, or fully outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    A,
    B,
    C,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
        }
    }
}

/// Misclassification rate versus classifier start time, with the region
/// boundaries induced by a consistency window.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub start_times: Vec<f64>,
    pub error_rates: Vec<f64>,
    /// Latest start whose window still lies fully inside the consistency
    /// window: L − window·sample_period.
    pub a_end: f64,
    /// Earliest start fully outside: L itself.
    pub c_start: f64,
}

impl ErrorCurve {
    pub fn region_of(&self, start_time: f64) -> Region {
        if start_time <= self.a_end {
            Region::A
        } else if start_time >= self.c_start {
            Region::C
        } else {
            Region::B
        }
    }

    fn region_values(&self, region: Region) -> impl Iterator<Item = f64> + '_ {
        self.start_times
            .iter()
            .zip(&self.error_rates)
            .filter(move |(t, _)| self.region_of(**t) == region)
            .map(|(_, e)| *e)
    }

    /// Mean error over a region's start times; None when the region holds
    /// no start time.
    pub fn mean_error(&self, region: Region) -> Option<f64> {
        let (sum, count) = self
            .region_values(region)
            .fold((0.0, 0usize), |(s, c), e| (s + e, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    /// Lowest error in a region; None when the region holds no start time.
    pub fn min_error(&self, region: Region) -> Option<f64> {
        self.region_values(region).reduce(f64::min)
    }
}

/// Evaluates a trained set on fresh test runs (seed stream disjoint from
/// training) and reports the error rate at every trained start index.
pub fn error_curve(
    config: &ReservoirConfig,
    set: &ClassifierSet,
    test_trials: usize,
    consistency_window: f64,
) -> Result<ErrorCurve> {
    let series_samples = set.start_count() + set.window();
    let runs = labeled_runs(
        config,
        set.n_bits(),
        test_trials,
        series_samples,
        purpose::TEST_SPLIT,
    )?;
    error_curve_from_runs(set, &runs, consistency_window)
}

/// Error rates of a trained set over pre-collected labeled runs.
pub fn error_curve_from_runs(
    set: &ClassifierSet,
    runs: &[LabeledRun],
    consistency_window: f64,
) -> Result<ErrorCurve> {
    let (series_samples, _) = validate_runs(runs, set.n_bits())?;
    if series_samples < set.start_count() + set.window() {
        return Err(Error::domain(format!(
            "test runs hold {series_samples} samples but the classifiers need {}",
            set.start_count() + set.window()
        )));
    }
    if !(consistency_window.is_finite() && consistency_window >= 0.0) {
        return Err(Error::domain(format!(
            "consistency window must be finite and non-negative, got {consistency_window}"
        )));
    }
    let error_rates: Vec<f64> = (0..set.start_count())
        .into_par_iter()
        .map(|j| {
            let mut miss = 0usize;
            for run in runs {
                if classify(set, &run.samples, j)? != run.word {
                    miss += 1;
                }
            }
            Ok(miss as f64 / runs.len() as f64)
        })
        .collect::<Result<_>>()?;
    let start_times = (0..set.start_count()).map(|j| set.start_time(j)).collect();
    Ok(ErrorCurve {
        start_times,
        error_rates,
        a_end: consistency_window - set.window() as f64 * set.sample_period(),
        c_start: consistency_window,
    })
}
