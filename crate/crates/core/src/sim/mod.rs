//! Tapped-delay-line fading simulator producing time-frequency grids.
//!
//! Each sample draws a fresh [`FadingProcess`] from its own random substream
//! (see [`substream`]). Tap gains are evaluated once per slot at
//! `t = slot * slot_duration` (block fading within a slot) and combined into
//! `H(f, t) = sum_l g_l(t) exp(-j 2 pi f tau_l)` on centred subcarrier
//! frequencies. Profiles are normalized to unit total power, so the expected
//! grid power is one.

pub mod fading;
pub mod profile;

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::image::{ChannelLabel, ImageError, TimeFreqGrid};

pub use fading::{
    complex_gain, frequency_response, max_doppler, sample_paths, substream, FadingProcess, PathComponent, TapFading,
    SPEED_OF_LIGHT,
};
pub use profile::{ProfileName, Tap, TapProfile};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid tap profile: {0}")]
    InvalidProfile(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Hz
    pub carrier_freq: f64,
    pub num_subcarriers: usize,
    /// Hz
    pub subcarrier_spacing: f64,
    pub num_slots: usize,
    /// seconds
    pub slot_duration: f64,
    /// km/h
    pub user_speed: f64,
    pub paths_per_tap: usize,
    pub seed: u64,
}

pub const DEFAULT_SLOT_DURATION: f64 = 1e-3 / 14.0;

impl Default for SimConfig {
    /// One 1.4 MHz LTE subframe at 2.1 GHz: 72 subcarriers x 14 symbols.
    fn default() -> Self {
        Self {
            carrier_freq: 2.1e9,
            num_subcarriers: 72,
            subcarrier_spacing: 15e3,
            num_slots: 14,
            slot_duration: DEFAULT_SLOT_DURATION,
            user_speed: 50.0,
            paths_per_tap: 64,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidArgument(msg));
        if self.num_subcarriers == 0 || self.num_slots == 0 || self.paths_per_tap == 0 {
            return bad(format!(
                "subcarriers, slots and paths per tap must be >= 1 (got {}, {}, {})",
                self.num_subcarriers, self.num_slots, self.paths_per_tap
            ));
        }
        if self.num_subcarriers > u16::MAX as usize || self.num_slots > u16::MAX as usize {
            return bad("grid dimensions must fit in 16 bits".into());
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing > 0.0) {
            return bad(format!(
                "subcarrier spacing must be > 0, got {}",
                self.subcarrier_spacing
            ));
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return bad(format!("slot duration must be > 0, got {}", self.slot_duration));
        }
        max_doppler(self.user_speed, self.carrier_freq)?;
        Ok(())
    }

    pub fn max_doppler(&self) -> Result<f64, SimError> {
        max_doppler(self.user_speed, self.carrier_freq)
    }

    /// Baseband subcarrier frequencies centred on the carrier.
    pub fn subcarrier_freqs(&self) -> Vec<f64> {
        let centre = (self.num_subcarriers as f64 - 1.0) / 2.0;
        (0..self.num_subcarriers)
            .map(|i| (i as f64 - centre) * self.subcarrier_spacing)
            .collect()
    }

    pub fn label(&self, profile: &TapProfile) -> Result<ChannelLabel, SimError> {
        Ok(ChannelLabel::new(profile.name().as_str(), self.user_speed as f32)?)
    }
}

/// Grid for one fading realization.
pub fn grid_from_process(config: &SimConfig, process: &FadingProcess) -> Result<TimeFreqGrid, SimError> {
    let freqs = config.subcarrier_freqs();
    let delays = process.delays();
    let columns = (0..config.num_slots)
        .map(|slot| {
            let gains = process.tap_gains(slot as f64 * config.slot_duration)?;
            frequency_response(&gains, &delays, &freqs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimeFreqGrid::from_columns(&columns)?)
}

fn sample_grid(config: &SimConfig, profile: &TapProfile, index: u64) -> Result<TimeFreqGrid, SimError> {
    let mut rng = substream(config.seed, index);
    let process = FadingProcess::new(profile, config.paths_per_tap, config.max_doppler()?, &mut rng)?;
    grid_from_process(config, &process)
}

/// Draws one grid from substream 0 of `config.seed`.
pub fn generate_grid(config: &SimConfig, profile: &TapProfile) -> Result<TimeFreqGrid, SimError> {
    config.validate()?;
    sample_grid(config, profile, 0)
}

/// Draws `count` independent grids; sample `i` uses substream `i`.
pub fn generate_dataset(config: &SimConfig, profile: &TapProfile, count: usize) -> Result<Dataset, SimError> {
    if count == 0 {
        return Err(SimError::InvalidArgument("sample count must be at least 1".into()));
    }
    config.validate()?;
    let label = config.label(profile)?;
    let grids = (0..count as u64)
        .into_par_iter()
        .map(|i| sample_grid(config, profile, i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dataset = Dataset::new(config.num_subcarriers, config.num_slots)?;
    for grid in &grids {
        dataset.push_grid(grid, label.clone())?;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            num_subcarriers: 12,
            num_slots: 6,
            seed: 11,
            ..SimConfig::default()
        }
    }

    #[test]
    fn default_geometry() {
        let config = SimConfig::default();
        let grid = generate_grid(&config, &TapProfile::etu()).unwrap();
        assert_eq!(grid.dims(), (72, 14));
        assert!((config.slot_duration - 71.428_571e-6).abs() < 1e-11);
    }

    #[test]
    fn zero_speed_is_time_invariant() {
        let config = SimConfig {
            user_speed: 0.0,
            ..small()
        };
        let grid = generate_grid(&config, &TapProfile::eva()).unwrap();
        let first = grid.column(0);
        for j in 1..grid.n() {
            assert_eq!(grid.column(j), first);
        }
    }

    #[test]
    fn grids_are_reproducible() {
        let a = generate_grid(&small(), &TapProfile::etu()).unwrap();
        let b = generate_grid(&small(), &TapProfile::etu()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_dataset_matches_grid() {
        let config = small();
        let ds = generate_dataset(&config, &TapProfile::ped_a(), 1).unwrap();
        let grid = generate_grid(&config, &TapProfile::ped_a()).unwrap();
        assert_eq!(ds.len(), 1);
        let stored = ds.grid(0);
        for (a, b) in stored.values().iter().zip(grid.values()) {
            assert_eq!(a.re, b.re as f32 as f64);
            assert_eq!(a.im, b.im as f32 as f64);
        }
        assert_eq!(ds.labels()[0], ChannelLabel::new("PedA", 50.0).unwrap());
    }

    #[test]
    fn seeds_give_distinct_grids() {
        let a = generate_grid(&small(), &TapProfile::etu()).unwrap();
        let b = generate_grid(&SimConfig { seed: 12, ..small() }, &TapProfile::etu()).unwrap();
        let diff = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff > 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate_dataset(&small(), &TapProfile::etu(), 0).is_err());
        for config in [
            SimConfig {
                num_subcarriers: 0,
                ..small()
            },
            SimConfig {
                num_slots: 0,
                ..small()
            },
            SimConfig {
                paths_per_tap: 0,
                ..small()
            },
            SimConfig {
                user_speed: -3.0,
                ..small()
            },
            SimConfig {
                carrier_freq: 0.0,
                ..small()
            },
            SimConfig {
                slot_duration: 0.0,
                ..small()
            },
        ] {
            assert!(generate_grid(&config, &TapProfile::etu()).is_err(), "{config:?}");
        }
    }

    #[test]
    fn dataset_power_is_near_one() {
        let ds = generate_dataset(&small(), &TapProfile::etu(), 400).unwrap();
        let mean = ds.grids().map(|g| g.mean_power()).sum::<f64>() / ds.len() as f64;
        assert!((0.95..=1.05).contains(&mean), "mean power {mean}");
    }
}
