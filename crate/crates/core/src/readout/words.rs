//! Input words and their wire encoding.
//!
//! Words are transmitted least-significant bit first as non-return-to-zero
//! levels, one bit per clock period (2.5 ns at the 400 MHz input clock), with
//! an optional all-ones header bit appended after the data so that the word
//! 0100 goes out as 01001. The line idles at 0.

use crate::error::{Error, Result};
use crate::signal::BooleanWaveform;

/// Input and sampling clock period, ns (400 MHz).
pub const BIT_PERIOD_NS: f64 = 2.5;

/// A data word plus its framing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct InputWord {
    /// Bits in transmission order (least-significant first).
    bits: Vec<bool>,
    /// Append a constant-1 header bit after the data.
    header: bool,
    /// Duration of one bit slot, ns.
    bit_period: f64,
}

impl InputWord {
    /// A word from bits in transmission order, header on, 400 MHz clock.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::domain("input word needs at least one bit".to_string()));
        }
        Ok(Self {
            bits,
            header: true,
            bit_period: BIT_PERIOD_NS,
        })
    }

    /// The `n_bits`-bit word for `index`, least-significant bit first.
    pub fn from_index(index: usize, n_bits: usize) -> Result<Self> {
        if n_bits == 0 || n_bits >= usize::BITS as usize {
            return Err(Error::domain(format!("bad word length {n_bits}")));
        }
        if index >> n_bits != 0 {
            return Err(Error::domain(format!(
                "index {index} does not fit in {n_bits} bits"
            )));
        }
        Self::new((0..n_bits).map(|k| (index >> k) & 1 == 1).collect())
    }

    /// Parses a bit string written in transmission order, e.g. `"0100"`.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    /// Same word without the header bit.
    pub fn without_header(mut self) -> Self {
        self.header = false;
        self
    }

    /// Same word with a different bit period.
    pub fn with_bit_period(mut self, bit_period: f64) -> Result<Self> {
        if !(bit_period > 0.0) || !bit_period.is_finite() {
            return Err(Error::domain(format!(
                "bit period must be positive, got {bit_period}"
            )));
        }
        self.bit_period = bit_period;
        Ok(self)
    }

    /// Appends `count` constant-1 bits after the data (before the header);
    /// used to build inputs sharing a long identical trailing segment.
    pub fn with_ones_suffix(mut self, count: usize) -> Self {
        self.bits.resize(self.bits.len() + count, true);
        self
    }

    /// Prepends `count` constant-1 bits before the data.
    pub fn with_ones_prefix(mut self, count: usize) -> Self {
        let mut bits = vec![true; count];
        bits.append(&mut self.bits);
        self.bits = bits;
        self
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn has_header(&self) -> bool {
        self.header
    }

    pub fn bit_period(&self) -> f64 {
        self.bit_period
    }

    /// The word as transmitted, header included.
    pub fn transmitted_bits(&self) -> Vec<bool> {
        let mut out = self.bits.clone();
        if self.header {
            out.push(true);
        }
        out
    }

    /// Time at which the transmission ends and the line returns to idle.
    pub fn encoded_duration(&self) -> f64 {
        (self.bits.len() + usize::from(self.header)) as f64 * self.bit_period
    }
}

/// Encodes a word as its wire waveform on `[0, horizon]`.
pub fn encode(word: &InputWord, horizon: f64) -> Result<BooleanWaveform> {
    let duration = word.encoded_duration();
    if horizon < duration {
        return Err(Error::domain(format!(
            "horizon {horizon} ns too short for a {duration} ns transmission"
        )));
    }
    let mut transitions = Vec::new();
    let mut level = false;
    for (slot, &bit) in word.transmitted_bits().iter().enumerate() {
        if bit != level {
            transitions.push(slot as f64 * word.bit_period);
            level = bit;
        }
    }
    if level {
        transitions.push(duration);
    }
    BooleanWaveform::new(false, transitions, horizon)
}
