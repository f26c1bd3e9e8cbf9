//! Labelled collections of channel images and their `.chim` file format.

mod csi;
pub mod format;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::image::{
    fit_normalization, ChannelImage, ChannelLabel, ImageError, NormalizationMethod, NormalizationSpec, TimeFreqGrid,
};
use crate::sim::substream;
use num_complex::Complex64;

pub use csi::{import_csi_csv, CsiFormat, CsiImport, CsiOptions};
pub use format::{read_dataset, write_dataset, DatasetHeader, FORMAT_VERSION, HEADER_LEN, MAGIC};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt dataset: {0}")]
    Corruption(String),
    #[error("unsupported dataset version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },
    #[error("no complete grids: {0}")]
    Empty(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Grids of one size with per-sample labels.
///
/// Samples are stored as `f32` planes exactly as laid out on disk. When the
/// dataset is normalized (`scale > 0`) the stored planes are divided by
/// `scale`; [`Dataset::grid`] always returns raw units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    m: usize,
    n: usize,
    scale: f64,
    labels: Vec<ChannelLabel>,
    data: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeReport {
    pub spec: NormalizationSpec,
    pub clamped: usize,
}

impl Dataset {
    pub fn new(m: usize, n: usize) -> Result<Self, DatasetError> {
        if m == 0 || n == 0 || m > u16::MAX as usize || n > u16::MAX as usize {
            return Err(DatasetError::InvalidArgument(format!(
                "grid dimensions {m}x{n} must be in 1..=65535"
            )));
        }
        Ok(Self {
            m,
            n,
            scale: 0.0,
            labels: Vec::new(),
            data: Vec::new(),
        })
    }

    pub(crate) fn from_parts(
        m: usize,
        n: usize,
        scale: f64,
        labels: Vec<ChannelLabel>,
        data: Vec<f32>,
    ) -> Result<Self, DatasetError> {
        let mut ds = Self::new(m, n)?;
        if data.len() != labels.len() * 2 * m * n {
            return Err(DatasetError::Corruption(format!(
                "{} floats for {} samples of {m}x{n}",
                data.len(),
                labels.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::Corruption(format!("non-finite value at float {i}")));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(DatasetError::Corruption(format!("invalid normalization scale {scale}")));
        }
        ds.scale = scale;
        ds.labels = labels;
        ds.data = data;
        Ok(ds)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// 0 when unnormalized.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn normalization(&self) -> Option<NormalizationSpec> {
        (self.scale > 0.0).then_some(NormalizationSpec {
            scale: self.scale,
            method: NormalizationMethod::GlobalMax,
        })
    }

    pub fn labels(&self) -> &[ChannelLabel] {
        &self.labels
    }

    /// Raw payload, `len() * m * n * 2` floats.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    fn sample_len(&self) -> usize {
        2 * self.m * self.n
    }

    /// Stored planes of one sample (plane 0 then plane 1, row-major).
    pub fn planes(&self, index: usize) -> &[f32] {
        let len = self.sample_len();
        &self.data[index * len..(index + 1) * len]
    }

    /// Stores a grid in raw units (divided by the scale when normalized).
    pub fn push_grid(&mut self, grid: &TimeFreqGrid, label: ChannelLabel) -> Result<(), DatasetError> {
        self.check_dims(grid.m(), grid.n())?;
        let inv = if self.scale > 0.0 { 1.0 / self.scale } else { 1.0 };
        let cells = grid.values();
        let start = self.data.len();
        self.data.extend(cells.iter().map(|v| (v.re * inv) as f32));
        self.data.extend(cells.iter().map(|v| (v.im * inv) as f32));
        if let Some(i) = self.data[start..].iter().position(|v| !v.is_finite()) {
            self.data.truncate(start);
            return Err(ImageError::NonFinite { index: i }.into());
        }
        self.labels.push(label);
        Ok(())
    }

    /// Stores an image. Normalized images must match the dataset scale.
    pub fn push_image(&mut self, image: &ChannelImage) -> Result<(), DatasetError> {
        let (m, n, _) = image.shape();
        self.check_dims(m, n)?;
        let image_scale = image.normalization.map_or(0.0, |s| s.scale);
        if image_scale != self.scale {
            return Err(DatasetError::InvalidArgument(format!(
                "image scale {image_scale} does not match dataset scale {}",
                self.scale
            )));
        }
        self.data.extend(image.planes().iter().map(|&v| v as f32));
        self.labels.push(image.label.clone());
        Ok(())
    }

    fn check_dims(&self, m: usize, n: usize) -> Result<(), DatasetError> {
        if (m, n) != (self.m, self.n) {
            return Err(DatasetError::InvalidArgument(format!(
                "grid is {m}x{n}, dataset holds {}x{}",
                self.m, self.n
            )));
        }
        Ok(())
    }

    /// Sample `index` in raw (denormalized) units.
    pub fn grid(&self, index: usize) -> TimeFreqGrid {
        let planes = self.planes(index);
        let (re, im) = planes.split_at(self.m * self.n);
        let factor = if self.scale > 0.0 { self.scale } else { 1.0 };
        let values = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r as f64 * factor, i as f64 * factor))
            .collect();
        TimeFreqGrid::new(self.m, self.n, values).expect("dataset invariants guarantee a valid grid")
    }

    pub fn grids(&self) -> impl ExactSizeIterator<Item = TimeFreqGrid> + '_ {
        (0..self.len()).map(|i| self.grid(i))
    }

    /// Sample `index` as stored, with the dataset normalization attached.
    pub fn image(&self, index: usize) -> ChannelImage {
        let planes = self.planes(index).iter().map(|&v| v as f64).collect();
        ChannelImage::new(self.m, self.n, planes, self.labels[index].clone(), self.normalization())
            .expect("dataset invariants guarantee a valid image")
    }

    /// Rescales the stored planes into `[-1, 1]`; the scale goes into the header.
    pub fn normalize(&mut self, method: NormalizationMethod) -> Result<NormalizeReport, DatasetError> {
        self.denormalize();
        let spec = fit_normalization(self.data.iter().map(|&v| v as f64), method)?;
        let mut clamped = 0;
        for v in self.data.iter_mut() {
            let scaled = *v as f64 / spec.scale;
            if scaled.abs() > 1.0 {
                clamped += 1;
            }
            *v = scaled.clamp(-1.0, 1.0) as f32;
        }
        self.scale = spec.scale;
        Ok(NormalizeReport { spec, clamped })
    }

    pub fn denormalize(&mut self) {
        if self.scale > 0.0 {
            let scale = self.scale;
            self.data.iter_mut().for_each(|v| *v = (*v as f64 * scale) as f32);
            self.scale = 0.0;
        }
    }

    /// New dataset holding the given samples in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let len = self.sample_len();
        let mut data = Vec::with_capacity(indices.len() * len);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.planes(i));
            labels.push(self.labels[i].clone());
        }
        Dataset {
            m: self.m,
            n: self.n,
            scale: self.scale,
            labels,
            data,
        }
    }

    /// Appends every sample of `other`, which must share dims and scale.
    pub fn extend_from(&mut self, other: &Dataset) -> Result<(), DatasetError> {
        self.check_dims(other.m, other.n)?;
        if other.scale != self.scale {
            return Err(DatasetError::InvalidArgument(
                "datasets have different normalization scales".into(),
            ));
        }
        self.data.extend_from_slice(&other.data);
        self.labels.extend(other.labels.iter().cloned());
        Ok(())
    }

    /// The label shared by every sample, if there is exactly one.
    pub fn common_label(&self) -> Option<&ChannelLabel> {
        let first = self.labels.first()?;
        self.labels.iter().all(|l| l == first).then_some(first)
    }
}

/// Random disjoint partition; `round(fraction * len)` samples (at least one
/// on each side) go to the first part. Both parts keep the original order.
pub fn split_dataset(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    if dataset.len() < 2 {
        return Err(DatasetError::InvalidArgument(format!(
            "cannot split a dataset of {} sample(s)",
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut substream(seed, 0));
    let first_len = ((fraction * dataset.len() as f64).round() as usize).clamp(1, dataset.len() - 1);
    let (a, b) = order.split_at_mut(first_len);
    a.sort_unstable();
    b.sort_unstable();
    Ok((dataset.select(a), dataset.select(b)))
}

/// Keeps samples whose label satisfies `predicate`, in order.
pub fn filter_by_label<F>(dataset: &Dataset, predicate: F) -> Dataset
where
    F: Fn(&ChannelLabel) -> bool,
{
    let keep: Vec<usize> = (0..dataset.len()).filter(|&i| predicate(&dataset.labels[i])).collect();
    dataset.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(count: usize, speeds: &[f32]) -> Dataset {
        let mut ds = Dataset::new(3, 2).unwrap();
        for i in 0..count {
            let grid = TimeFreqGrid::from_fn(3, 2, |a, b| Complex64::new((i * 10 + a) as f64, b as f64 - 0.5)).unwrap();
            let speed = speeds[i % speeds.len()];
            ds.push_grid(&grid, ChannelLabel::new("ETU", speed).unwrap()).unwrap();
        }
        ds
    }

    #[test]
    fn split_halves() {
        let ds = dataset(1000, &[50.0]);
        let (a, b) = split_dataset(&ds, 0.5, 4).unwrap();
        assert_eq!((a.len(), b.len()), (500, 500));
        let (a2, b2) = split_dataset(&ds, 0.5, 4).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        let (a3, _) = split_dataset(&ds, 0.5, 5).unwrap();
        assert_ne!(a, a3);
    }

    #[test]
    fn split_partitions_indices() {
        let ds = dataset(37, &[1.0]);
        let (a, b) = split_dataset(&ds, 0.3, 9).unwrap();
        let mut firsts: Vec<i64> = a.grids().chain(b.grids()).map(|g| g.get(0, 0).re as i64).collect();
        firsts.sort_unstable();
        assert_eq!(firsts, (0..37).map(|i| i * 10).collect::<Vec<_>>());
        assert!(a
            .grids()
            .map(|g| g.get(0, 0).re)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[0] < w[1]));
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(split_dataset(&dataset(1, &[1.0]), 0.5, 0).is_err());
        assert!(split_dataset(&dataset(10, &[1.0]), 0.0, 0).is_err());
        assert!(split_dataset(&dataset(10, &[1.0]), 1.0, 0).is_err());
    }

    #[test]
    fn filter_keeps_matching_speed_in_order() {
        let ds = dataset(12, &[25.0, 50.0, 75.0]);
        let only = filter_by_label(&ds, |l| l.user_speed == 50.0);
        assert_eq!(only.len(), 4);
        assert!(only.labels().iter().all(|l| l.user_speed == 50.0));
        let firsts: Vec<f64> = only.grids().map(|g| g.get(0, 0).re).collect();
        assert_eq!(firsts, vec![10.0, 40.0, 70.0, 100.0]);
        assert!(filter_by_label(&ds, |l| l.channel_type == "EVA").is_empty());
    }

    #[test]
    fn normalize_and_restore() {
        let mut ds = dataset(5, &[3.0]);
        let raw = ds.clone();
        let report = ds.normalize(NormalizationMethod::GlobalMax).unwrap();
        assert_eq!(report.spec.scale, 42.0);
        assert_eq!(report.clamped, 0);
        assert!(ds.data().iter().all(|v| v.abs() <= 1.0));
        for (a, b) in ds.grids().zip(raw.grids()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() <= 1e-6 * y.norm().max(1.0));
            }
        }
        ds.denormalize();
        assert_eq!(ds.scale(), 0.0);
    }

    #[test]
    fn all_zero_dataset_cannot_normalize() {
        let mut ds = Dataset::new(2, 2).unwrap();
        ds.push_grid(
            &TimeFreqGrid::zeros(2, 2).unwrap(),
            ChannelLabel::new("x", 0.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            ds.normalize(NormalizationMethod::GlobalMax),
            Err(DatasetError::Image(ImageError::DegenerateScale(_)))
        ));
    }

    #[test]
    fn rejects_mismatched_grid() {
        let mut ds = Dataset::new(3, 2).unwrap();
        let grid = TimeFreqGrid::zeros(2, 3).unwrap();
        assert!(ds.push_grid(&grid, ChannelLabel::new("x", 0.0).unwrap()).is_err());
        assert!(ds.is_empty());
    }

    #[test]
    fn images_carry_labels_and_scale() {
        let mut ds = dataset(2, &[80.0]);
        ds.normalize(NormalizationMethod::GlobalMax).unwrap();
        let image = ds.image(1);
        assert_eq!(image.label.user_speed, 80.0);
        assert_eq!(image.normalization.unwrap().scale, ds.scale());
        let mut copy = Dataset::new(3, 2).unwrap();
        assert!(copy.push_image(&image).is_err());
    }
}
