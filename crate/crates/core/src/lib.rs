//! Multipath fading channels as time-frequency "channel images".
//!
//! - [`sim`]: tapped-delay-line sum-of-sinusoids simulator (ETU, EVA, PedA).
//! - [`image`]: grids, two-plane channel images, normalization.
//! - [`dataset`]: the `.chim` dataset format, CSI CSV import, splits.
//! - [`metrics`]: LCR, AFD, mean autocorrelation, cepstrum and cepstral
//!   distance matrices.

pub mod dataset;
pub mod image;
pub mod metrics;
pub mod sim;

pub use dataset::{read_dataset, write_dataset, Dataset, DatasetError};
pub use image::{ChannelImage, ChannelLabel, NormalizationMethod, NormalizationSpec, TimeFreqGrid};
pub use metrics::{MetricsError, Scheme};
pub use sim::{SimConfig, SimError, TapProfile};
