//! Level crossing rate and average fade duration of envelope sequences.
//!
//! Thresholds are given in dB relative to the RMS envelope of the whole set.
//! A crossing is a strict up-crossing `s[k] < level <= s[k+1]`; a sample is
//! below a level when `s[k] < level`, and a fade is a maximal run of such
//! samples. Time is sample-and-hold with a fixed sample interval.
//!
//! Counts for all levels come from one pass over the sequence: each sample
//! pair marks the contiguous range of (sorted) levels it affects in a
//! difference array, so the cost is `O(L log K + K)` per sequence.

use rayon::prelude::*;
use serde::Serialize;

use super::MetricsError;

/// 40 levels from -30 dB to +10 dB relative to RMS.
pub fn default_levels_db() -> Vec<f64> {
    const COUNT: usize = 40;
    (0..COUNT)
        .map(|i| -30.0 + 40.0 * i as f64 / (COUNT - 1) as f64)
        .collect()
}

/// Envelopes sampled every `sample_interval` seconds.
#[derive(Debug, Clone)]
pub struct EnvelopeSet {
    pub envelopes: Vec<Vec<f64>>,
    pub sample_interval: f64,
}

impl EnvelopeSet {
    pub fn new(envelopes: Vec<Vec<f64>>, sample_interval: f64) -> Result<Self, MetricsError> {
        if envelopes.is_empty() || envelopes.iter().all(Vec::is_empty) {
            return Err(MetricsError::InvalidArgument("envelope set is empty".into()));
        }
        if !(sample_interval.is_finite() && sample_interval > 0.0) {
            return Err(MetricsError::InvalidArgument(format!(
                "sample interval must be positive, got {sample_interval}"
            )));
        }
        if envelopes.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MetricsError::InvalidArgument(
                "envelopes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            envelopes,
            sample_interval,
        })
    }

    pub fn rms(&self) -> f64 {
        let (sum, count) = self
            .envelopes
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
        (sum / count as f64).sqrt()
    }

    pub fn median(&self) -> f64 {
        let mut all: Vec<f64> = self.envelopes.iter().flatten().copied().collect();
        all.sort_unstable_by(f64::total_cmp);
        let mid = all.len() / 2;
        if all.len().is_multiple_of(2) {
            0.5 * (all[mid - 1] + all[mid])
        } else {
            all[mid]
        }
    }

    /// Absolute thresholds for levels in dB relative to RMS.
    pub fn thresholds(&self, levels_db: &[f64]) -> Vec<f64> {
        let rms = self.rms();
        levels_db.iter().map(|db| rms * 10f64.powf(db / 20.0)).collect()
    }
}

/// Raw per-level counts for one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelCounts {
    pub up_crossings: Vec<u64>,
    pub samples_below: Vec<u64>,
    pub fades: Vec<u64>,
}

impl LevelCounts {
    fn zeros(levels: usize) -> Self {
        Self {
            up_crossings: vec![0; levels],
            samples_below: vec![0; levels],
            fades: vec![0; levels],
        }
    }

    fn add(&mut self, other: &LevelCounts) {
        for (a, b) in self.up_crossings.iter_mut().zip(&other.up_crossings) {
            *a += b;
        }
        for (a, b) in self.samples_below.iter_mut().zip(&other.samples_below) {
            *a += b;
        }
        for (a, b) in self.fades.iter_mut().zip(&other.fades) {
            *a += b;
        }
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<(), MetricsError> {
    if thresholds.is_empty() {
        return Err(MetricsError::InvalidArgument("no levels given".into()));
    }
    if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::InvalidArgument(
            "levels must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Counts crossings, samples below and fades of `envelope` at every
/// threshold. `thresholds` must be strictly increasing.
pub fn level_counts(envelope: &[f64], thresholds: &[f64]) -> LevelCounts {
    let k = thresholds.len();
    // index of the first threshold strictly greater than v
    let above = |v: f64| thresholds.partition_point(|&t| t <= v);
    let mut crossing_diff = vec![0i64; k + 1];
    let mut below_diff = vec![0i64; k + 1];
    let mut fade_diff = vec![0i64; k + 1];

    let mark = |diff: &mut [i64], lo: usize, hi: usize| {
        if lo < hi {
            diff[lo] += 1;
            diff[hi] -= 1;
        }
    };

    if let Some(&first) = envelope.first() {
        // a run that starts the sequence is a fade for every level above it
        mark(&mut fade_diff, above(first), k);
    }
    for (i, &v) in envelope.iter().enumerate() {
        let idx = above(v);
        mark(&mut below_diff, idx, k);
        if i > 0 {
            let prev = envelope[i - 1];
            let prev_idx = above(prev);
            // up-crossing for prev < t <= v
            mark(&mut crossing_diff, prev_idx, idx);
            // fade starts for v < t <= prev
            mark(&mut fade_diff, idx, prev_idx);
        }
    }

    let integrate = |diff: &[i64]| {
        diff[..k]
            .iter()
            .scan(0i64, |acc, d| {
                *acc += d;
                Some(*acc as u64)
            })
            .collect()
    };
    LevelCounts {
        up_crossings: integrate(&crossing_diff),
        samples_below: integrate(&below_diff),
        fades: integrate(&fade_diff),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelMetric {
    Lcr,
    Afd,
}

/// A level-indexed statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCurve {
    pub metric: LevelMetric,
    /// Levels in dB relative to the RMS envelope.
    pub levels_db: Vec<f64>,
    /// Absolute envelope thresholds.
    pub thresholds: Vec<f64>,
    pub rms: f64,
    /// LCR in crossings per second, AFD in seconds.
    pub values: Vec<f64>,
    pub sequence_count: usize,
}

fn summed_counts(set: &EnvelopeSet, thresholds: &[f64]) -> LevelCounts {
    set.envelopes
        .par_iter()
        .map(|env| level_counts(env, thresholds))
        .collect::<Vec<_>>()
        .iter()
        .fold(LevelCounts::zeros(thresholds.len()), |mut acc, c| {
            acc.add(c);
            acc
        })
}

/// Mean up-crossing rate per level across the sequences.
pub fn lcr(set: &EnvelopeSet, levels_db: &[f64]) -> Result<LevelCurve, MetricsError> {
    let thresholds = set.thresholds(levels_db);
    check_thresholds(&thresholds)?;
    let per_sequence: Vec<LevelCounts> = set
        .envelopes
        .par_iter()
        .map(|env| level_counts(env, &thresholds))
        .collect();
    let mut values = vec![0.0; thresholds.len()];
    for (env, counts) in set.envelopes.iter().zip(&per_sequence) {
        let duration = env.len() as f64 * set.sample_interval;
        if duration > 0.0 {
            for (v, &c) in values.iter_mut().zip(&counts.up_crossings) {
                *v += c as f64 / duration;
            }
        }
    }
    let count = set.envelopes.len() as f64;
    values.iter_mut().for_each(|v| *v /= count);
    Ok(LevelCurve {
        metric: LevelMetric::Lcr,
        levels_db: levels_db.to_vec(),
        thresholds,
        rms: set.rms(),
        values,
        sequence_count: set.envelopes.len(),
    })
}

/// Total time below each level divided by the number of fades, pooled over
/// the sequences; 0 where no fade occurs.
pub fn afd(set: &EnvelopeSet, levels_db: &[f64]) -> Result<LevelCurve, MetricsError> {
    let thresholds = set.thresholds(levels_db);
    check_thresholds(&thresholds)?;
    let totals = summed_counts(set, &thresholds);
    let values = totals
        .samples_below
        .iter()
        .zip(&totals.fades)
        .map(|(&below, &fades)| {
            if fades == 0 {
                0.0
            } else {
                below as f64 * set.sample_interval / fades as f64
            }
        })
        .collect();
    Ok(LevelCurve {
        metric: LevelMetric::Afd,
        levels_db: levels_db.to_vec(),
        thresholds,
        rms: set.rms(),
        values,
        sequence_count: set.envelopes.len(),
    })
}
