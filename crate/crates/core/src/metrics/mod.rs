//! Statistical evaluation of channel datasets: level crossing rate, average
//! fade duration, mean autocorrelation, its cepstrum, and cepstral distances.

pub mod autocorr;
pub mod cdm;
pub mod cepstrum;
pub mod export;
pub mod level;
pub mod sequence;

use thiserror::Error;

use crate::dataset::Dataset;

pub use autocorr::{autocorr, biased_autocorr, centered_magnitudes, mean_autocorr, mean_autocorr_grids, AutocorrMean};
pub use cdm::{cdm_matrix, dataset_cepstrum, CdmMatrix, NamedDataset};
pub use cepstrum::{cdm, cepstrum, CepstrumVector, DEFAULT_EPSILON, DEFAULT_K};
pub use level::{afd, default_levels_db, lcr, level_counts, EnvelopeSet, LevelCounts, LevelCurve, LevelMetric};
pub use sequence::{
    grid_to_freqconcat_sequence, grid_to_sequence, grid_to_time_sequence, grid_to_timeconcat_sequence, Scheme,
    Sequence1D,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

/// Envelopes `|ifft-time sequence|` of every sample; the sample interval is
/// `slot_duration / m`.
pub fn envelope_set(dataset: &Dataset, slot_duration: f64) -> Result<EnvelopeSet, MetricsError> {
    if dataset.is_empty() {
        return Err(MetricsError::InvalidArgument("dataset is empty".into()));
    }
    let envelopes = dataset
        .grids()
        .map(|g| grid_to_time_sequence(&g).magnitudes())
        .collect();
    EnvelopeSet::new(envelopes, slot_duration / dataset.m() as f64)
}
