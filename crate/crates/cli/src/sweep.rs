//! The (N1, N2) dimensionality sweep.

use boolres_core::metrics::{effective_dimensionality, DimensionalityResult};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// What one grid cell produced.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    /// The measurement ran; `degenerate` inside marks a window that never
    /// converged (its L is the record length, a censored value).
    Measured(DimensionalityResult),
    /// The cell's simulation failed; the sweep records the reason and moves
    /// on.
    Failed(String),
}

/// One cell of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n1: usize,
    pub n2: usize,
    /// Total line delays, ns; absent when the lines could not be built.
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub outcome: CellOutcome,
}

impl SweepCell {
    /// The measurement, when the cell both ran and converged.
    pub fn converged(&self) -> Option<&DimensionalityResult> {
        match &self.outcome {
            CellOutcome::Measured(result) if !result.degenerate => Some(result),
            _ => None,
        }
    }
}

/// The grid of dimensionality measurements plus its argmax cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Row-major over the configured ranges: n1 outer, n2 inner.
    pub cells: Vec<SweepCell>,
    pub n1_range: (usize, usize),
    pub n2_range: (usize, usize),
    /// Cell with the largest D among converged cells; `None` when every
    /// cell failed or never converged.
    pub argmax: Option<(usize, usize)>,
}

impl SweepResult {
    pub fn cell(&self, n1: usize, n2: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.n1 == n1 && c.n2 == n2)
    }

    /// The argmax cell's measurement.
    pub fn best(&self) -> Option<(&SweepCell, &DimensionalityResult)> {
        let (n1, n2) = self.argmax?;
        let cell = self.cell(n1, n2)?;
        cell.converged().map(|result| (cell, result))
    }
}

/// Ranks candidate argmax cells: larger D first, exact or floating-point
/// ties broken toward the longer window and then the lexicographically
/// smaller cell, so the winner never depends on grid iteration order or on
/// the last bit of an arithmetically tied product.
fn better_cell(
    a: (usize, usize, &DimensionalityResult),
    b: (usize, usize, &DimensionalityResult),
) -> bool {
    let tol = 1e-9 * a.2.d.abs().max(b.2.d.abs()).max(1.0);
    if (a.2.d - b.2.d).abs() > tol {
        return a.2.d > b.2.d;
    }
    if (a.2.l - b.2.l).abs() > 1e-12 {
        return a.2.l > b.2.l;
    }
    (a.0, a.1) < (b.0, b.1)
}

/// Measures effective dimensionality over the configured (N1, N2) ranges.
///
/// Cells run in parallel but land in grid order, and each derives its seeds
/// from the master seed and its own coordinates, so the grid is identical
/// for any worker count and any sub-range can be reproduced alone. A
/// degenerate window carries a censored L (the record length), so those
/// cells keep their numbers in the grid but are not argmax candidates.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let (lo1, hi1) = config.n1_range;
    let (lo2, hi2) = config.n2_range;
    let coords: Vec<(usize, usize)> = (lo1..=hi1)
        .flat_map(|n1| (lo2..=hi2).map(move |n2| (n1, n2)))
        .collect();

    let cells: Vec<SweepCell> = coords
        .into_par_iter()
        .map(|(n1, n2)| {
            let reservoir = match config.cell_reservoir(n1, n2) {
                Ok(reservoir) => reservoir,
                Err(err) => {
                    return SweepCell {
                        n1,
                        n2,
                        t1: None,
                        t2: None,
                        outcome: CellOutcome::Failed(err.to_string()),
                    }
                }
            };
            let t1 = Some(reservoir.line1.total_delay());
            let t2 = Some(reservoir.line2.total_delay());
            let options = config.dimensionality_options();
            match effective_dimensionality(&reservoir, &options) {
                Ok(result) => SweepCell {
                    n1,
                    n2,
                    t1,
                    t2,
                    outcome: CellOutcome::Measured(result),
                },
                Err(err) => SweepCell {
                    n1,
                    n2,
                    t1,
                    t2,
                    outcome: CellOutcome::Failed(err.to_string()),
                },
            }
        })
        .collect();

    let argmax = cells
        .iter()
        .filter_map(|cell| cell.converged().map(|r| (cell.n1, cell.n2, r)))
        .fold(None::<(usize, usize, &DimensionalityResult)>, |best, cand| {
            match best {
                None => Some(cand),
                Some(current) => {
                    if better_cell(cand, current) {
                        Some(cand)
                    } else {
                        Some(current)
                    }
                }
            }
        })
        .map(|(n1, n2, _)| (n1, n2));

    Ok(SweepResult {
        cells,
        n1_range: config.n1_range,
        n2_range: config.n2_range,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use boolres_core::metrics::DimensionalityResult;

    fn result(l: f64, d: f64) -> DimensionalityResult {
        DimensionalityResult {
            l,
            k: 0.5,
            gamma: 0.25,
            delta: d / l,
            d,
            m: 40,
            degenerate: false,
        }
    }

    #[test]
    fn tie_break_prefers_longer_window_then_lexicographic() {
        let short = result(50.0, 17.5);
        let long = result(175.0, 17.5);
        assert!(better_cell((9, 14, &long), (14, 18, &short)));
        assert!(!better_cell((14, 18, &short), (9, 14, &long)));

        let same_a = result(100.0, 10.0);
        let same_b = result(100.0, 10.0);
        assert!(better_cell((8, 12, &same_a), (8, 13, &same_b)));
        assert!(!better_cell((8, 13, &same_b), (8, 12, &same_a)));
    }

    #[test]
    fn tie_break_ignores_float_ulp_differences() {
        // 2.5 * 7 computed two ways can differ in the last bit; both
        // represent the same rational product and must count as tied.
        let a = result(43.75, 2.5 * 7.0);
        let b = result(175.0, 17.5 + 1e-13);
        assert!(better_cell((7, 7, &b), (7, 8, &a)));
    }

    #[test]
    fn one_by_one_sweep_matches_direct_measurement() {
        let mut config = ExperimentConfig::default();
        config.n1_range = (8, 8);
        config.n2_range = (11, 11);
        config.trials = 6;
        config.record_len = 300.0;
        let sweep = run_sweep(&config).unwrap();
        assert_eq!(sweep.cells.len(), 1);

        let reservoir = config.cell_reservoir(8, 11).unwrap();
        let direct =
            effective_dimensionality(&reservoir, &config.dimensionality_options()).unwrap();
        match &sweep.cells[0].outcome {
            CellOutcome::Measured(result) => assert_eq!(result, &direct),
            other => panic!("expected a measurement, got {other:?}"),
        }
    }

    #[test]
    fn sweep_grid_is_worker_count_invariant() {
        let mut config = ExperimentConfig::default();
        config.n1_range = (7, 8);
        config.n2_range = (10, 11);
        config.trials = 4;
        config.record_len = 200.0;
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_sweep(&config).unwrap());
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_sweep(&config).unwrap());
        assert_eq!(single, several);
    }
}
