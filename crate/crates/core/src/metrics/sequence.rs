//! Flattening a time-frequency grid into a quasi-periodic 1D sequence.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::image::TimeFreqGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Inverse DFT of each slot's frequency response, slots in order.
    IfftTime,
    /// Slot frequency responses back to back.
    FreqConcat,
    /// Subcarrier time series back to back.
    TimeConcat,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::IfftTime, Scheme::FreqConcat, Scheme::TimeConcat];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::IfftTime => "ifft-time",
            Scheme::FreqConcat => "freq-concat",
            Scheme::TimeConcat => "time-concat",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected ifft-time, freq-concat or time-concat)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence1D {
    pub values: Vec<Complex64>,
    pub scheme: Scheme,
    pub source_index: Option<usize>,
}

impl Sequence1D {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Per-slot inverse DFT, normalized by `1/m`, concatenated in slot order.
pub fn grid_to_time_sequence(grid: &TimeFreqGrid) -> Sequence1D {
    let m = grid.m();
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let scale = 1.0 / m as f64;
    let mut values = Vec::with_capacity(m * grid.n());
    for slot in 0..grid.n() {
        let mut column = grid.column(slot);
        ifft.process(&mut column);
        values.extend(column.into_iter().map(|v| v * scale));
    }
    Sequence1D {
        values,
        scheme: Scheme::IfftTime,
        source_index: None,
    }
}

pub fn grid_to_freqconcat_sequence(grid: &TimeFreqGrid) -> Sequence1D {
    let values = (0..grid.n()).flat_map(|slot| grid.column(slot)).collect();
    Sequence1D {
        values,
        scheme: Scheme::FreqConcat,
        source_index: None,
    }
}

pub fn grid_to_timeconcat_sequence(grid: &TimeFreqGrid) -> Sequence1D {
    // row-major storage is already subcarrier-major
    Sequence1D {
        values: grid.values().to_vec(),
        scheme: Scheme::TimeConcat,
        source_index: None,
    }
}

pub fn grid_to_sequence(grid: &TimeFreqGrid, scheme: Scheme) -> Sequence1D {
    match scheme {
        Scheme::IfftTime => grid_to_time_sequence(grid),
        Scheme::FreqConcat => grid_to_freqconcat_sequence(grid),
        Scheme::TimeConcat => grid_to_timeconcat_sequence(grid),
    }
}
