//! Event-driven simulator and analysis toolkit for a reservoir computer built
//! from a single XOR logic gate with two delayed feedback lines.
//!
//! The crate is organized around the experiment pipeline:
//!
//! * [`signal`] — exact piecewise-constant Boolean waveforms and distances.
//! * [`sim`] — delay-line construction and the discrete-event gate simulator.
//! * [`metrics`] — consistency windows, Lyapunov slopes, and rank-based
//!   dimensionality measures.
//! * [`readout`] — input word encoding, linear classifier training, and
//!   time-resolved classification error curves.
//! * [`seeds`] — deterministic seed derivation so every run is replayable.

pub mod error;
pub mod metrics;
pub mod readout;
pub mod seeds;
pub mod signal;
pub mod sim;

pub use error::{Error, Result};
pub use metrics::{ConsistencyReport, DimensionalityResult, StateMatrix};
pub use readout::InputWord;
pub use signal::{BooleanWaveform, SampleTrain};
pub use sim::{CalibrationTable, DelayLineMode, DelayLineSpec, LineId, ReservoirConfig};
