//! Input encoding and the linear readout layer.

mod classify;
mod words;

pub use classify::{
    classify, error_curve, error_curve_from_runs, labeled_runs, train, train_from_runs,
    ClassifierSet, ErrorCurve, LabeledRun, Region, DEFAULT_CLASSIFY_WINDOW, DEFAULT_RIDGE,
    DEFAULT_SERIES_SAMPLES, MAX_WORD_BITS,
};
pub use words::{encode, InputWord, BIT_PERIOD_NS};
