//! Time-frequency grids and their two-plane channel-image encoding.
//!
//! A [`TimeFreqGrid`] holds `m` subcarriers by `n` time slots of complex
//! channel gain. A [`ChannelImage`] stores the same data as two real planes,
//! the real part first and the imaginary part second, together with a
//! [`ChannelLabel`] and an optional [`NormalizationSpec`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageError {
    #[error("grid dimensions must be non-zero (got {m}x{n})")]
    EmptyDims { m: usize, n: usize },
    #[error("expected {expected} values for a {m}x{n} grid, got {actual}")]
    SizeMismatch {
        m: usize,
        n: usize,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("cannot fit a normalization scale: {0}")]
    DegenerateScale(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
}

/// `m x n` complex channel response, stored row-major (row = subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFreqGrid {
    m: usize,
    n: usize,
    values: Vec<Complex64>,
}

impl TimeFreqGrid {
    pub fn new(m: usize, n: usize, values: Vec<Complex64>) -> Result<Self, ImageError> {
        if m == 0 || n == 0 {
            return Err(ImageError::EmptyDims { m, n });
        }
        if values.len() != m * n {
            return Err(ImageError::SizeMismatch {
                m,
                n,
                expected: m * n,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ImageError::NonFinite { index });
        }
        Ok(Self { m, n, values })
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self, ImageError> {
        Self::new(m, n, vec![Complex64::new(0.0, 0.0); m * n])
    }

    /// Builds a grid from `f(subcarrier, slot)`.
    pub fn from_fn<F>(m: usize, n: usize, mut f: F) -> Result<Self, ImageError>
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut values = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        Self::new(m, n, values)
    }

    /// Builds a grid from per-slot frequency responses (each of length `m`).
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self, ImageError> {
        let n = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != m) {
            return Err(ImageError::SizeMismatch {
                m,
                n,
                expected: m,
                actual: bad.len(),
            });
        }
        Self::from_fn(m, n, |i, j| columns[j][i])
    }

    /// Number of subcarriers.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of time slots.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, subcarrier: usize, slot: usize) -> Complex64 {
        self.values[subcarrier * self.n + slot]
    }

    /// Time series of one subcarrier.
    pub fn row(&self, subcarrier: usize) -> &[Complex64] {
        &self.values[subcarrier * self.n..(subcarrier + 1) * self.n]
    }

    /// Frequency response of one slot.
    pub fn column(&self, slot: usize) -> Vec<Complex64> {
        (0..self.m).map(|i| self.get(i, slot)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.n {
            for i in 0..self.m {
                values.push(self.get(i, j));
            }
        }
        Self {
            m: self.n,
            n: self.m,
            values,
        }
    }

    pub fn mean_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    /// Mean absolute difference of `|H|` between neighbouring slots.
    ///
    /// Grows with the Doppler rate; zero for a time-invariant channel.
    pub fn time_variation(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..self.m {
            let row = self.row(i);
            total += row.windows(2).map(|w| (w[1].norm() - w[0].norm()).abs()).sum::<f64>();
        }
        total / (self.m * (self.n - 1)) as f64
    }
}

/// Channel type and user speed (km/h, single precision as stored on disk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub channel_type: String,
    pub user_speed: f32,
}

impl ChannelLabel {
    pub fn new(channel_type: impl Into<String>, user_speed: f32) -> Result<Self, ImageError> {
        if !user_speed.is_finite() || user_speed < 0.0 {
            return Err(ImageError::InvalidLabel(format!(
                "user speed must be finite and >= 0, got {user_speed}"
            )));
        }
        Ok(Self {
            channel_type: channel_type.into(),
            user_speed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMethod {
    /// Largest absolute plane value maps to 1.
    GlobalMax,
    /// 99.9th percentile of absolute plane values maps to 1; outliers are clamped.
    GlobalPercentile,
}

const NORMALIZATION_PERCENTILE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub scale: f64,
    pub method: NormalizationMethod,
}

impl NormalizationSpec {
    pub fn new(scale: f64, method: NormalizationMethod) -> Result<Self, ImageError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ImageError::DegenerateScale(format!(
                "scale must be finite and positive, got {scale}"
            )));
        }
        Ok(Self { scale, method })
    }

    /// Divides by the scale and clamps into `[-1, 1]`.
    pub fn apply(&self, value: f64) -> f64 {
        (value / self.scale).clamp(-1.0, 1.0)
    }

    pub fn invert(&self, value: f64) -> f64 {
        value * self.scale
    }

    /// Applies in place; returns how many values had to be clamped.
    pub fn apply_slice(&self, values: &mut [f64]) -> usize {
        let mut clamped = 0;
        for v in values.iter_mut() {
            let scaled = *v / self.scale;
            if scaled.abs() > 1.0 {
                clamped += 1;
            }
            *v = scaled.clamp(-1.0, 1.0);
        }
        clamped
    }
}

/// Fits a scale over every plane value (real and imaginary parts alike).
pub fn fit_normalization<I>(values: I, method: NormalizationMethod) -> Result<NormalizationSpec, ImageError>
where
    I: IntoIterator<Item = f64>,
{
    let mut magnitudes: Vec<f64> = values.into_iter().map(f64::abs).collect();
    if magnitudes.is_empty() {
        return Err(ImageError::DegenerateScale("empty dataset".into()));
    }
    if let Some(index) = magnitudes.iter().position(|v| !v.is_finite()) {
        return Err(ImageError::NonFinite { index });
    }
    let statistic = match method {
        NormalizationMethod::GlobalMax => magnitudes.iter().copied().fold(0.0, f64::max),
        NormalizationMethod::GlobalPercentile => {
            // nearest-rank percentile
            let rank = ((NORMALIZATION_PERCENTILE * magnitudes.len() as f64).ceil() as usize).max(1);
            let (_, value, _) = magnitudes.select_nth_unstable_by(rank - 1, f64::total_cmp);
            *value
        }
    };
    if statistic <= 0.0 {
        return Err(ImageError::DegenerateScale("all values are zero".into()));
    }
    NormalizationSpec::new(statistic, method)
}

/// `m x n x 2` real encoding of a grid.
///
/// `planes` holds plane 0 (real parts, row-major) followed by plane 1
/// (imaginary parts, row-major). When `normalization` is set the planes are
/// in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImage {
    m: usize,
    n: usize,
    planes: Vec<f64>,
    pub label: ChannelLabel,
    pub normalization: Option<NormalizationSpec>,
}

impl ChannelImage {
    pub fn new(
        m: usize,
        n: usize,
        planes: Vec<f64>,
        label: ChannelLabel,
        normalization: Option<NormalizationSpec>,
    ) -> Result<Self, ImageError> {
        if m == 0 || n == 0 {
            return Err(ImageError::EmptyDims { m, n });
        }
        if planes.len() != 2 * m * n {
            return Err(ImageError::SizeMismatch {
                m,
                n,
                expected: 2 * m * n,
                actual: planes.len(),
            });
        }
        if let Some(index) = planes.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite { index });
        }
        Ok(Self {
            m,
            n,
            planes,
            label,
            normalization,
        })
    }

    /// `(m, n, 2)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.n, 2)
    }

    pub fn planes(&self) -> &[f64] {
        &self.planes
    }

    pub fn real_plane(&self) -> &[f64] {
        &self.planes[..self.m * self.n]
    }

    pub fn imag_plane(&self) -> &[f64] {
        &self.planes[self.m * self.n..]
    }

    /// Normalizes the planes with `spec`, returning the clamp count.
    ///
    /// An already normalized image is first restored to raw units.
    pub fn normalize(&mut self, spec: NormalizationSpec) -> usize {
        if let Some(old) = self.normalization.take() {
            self.planes.iter_mut().for_each(|v| *v = old.invert(*v));
        }
        let clamped = spec.apply_slice(&mut self.planes);
        self.normalization = Some(spec);
        clamped
    }
}

pub fn grid_to_image(grid: &TimeFreqGrid, label: ChannelLabel) -> ChannelImage {
    let mut planes = Vec::with_capacity(2 * grid.values.len());
    planes.extend(grid.values.iter().map(|v| v.re));
    planes.extend(grid.values.iter().map(|v| v.im));
    ChannelImage {
        m: grid.m,
        n: grid.n,
        planes,
        label,
        normalization: None,
    }
}

/// Inverse of [`grid_to_image`], denormalizing when a spec is attached.
pub fn image_to_grid(image: &ChannelImage) -> TimeFreqGrid {
    let denorm = |v: f64| image.normalization.map_or(v, |spec| spec.invert(v));
    let values = image
        .real_plane()
        .iter()
        .zip(image.imag_plane())
        .map(|(&re, &im)| Complex64::new(denorm(re), denorm(im)))
        .collect();
    TimeFreqGrid {
        m: image.m,
        n: image.n,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn label() -> ChannelLabel {
        ChannelLabel::new("ETU", 50.0).unwrap()
    }

    #[test]
    fn constant_grid_splits_into_planes() {
        let grid = TimeFreqGrid::from_fn(3, 4, |_, _| Complex64::new(1.0, 2.0)).unwrap();
        let image = grid_to_image(&grid, label());
        assert!(image.real_plane().iter().all(|&v| v == 1.0));
        assert!(image.imag_plane().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn real_grid_has_zero_imaginary_plane() {
        let grid = TimeFreqGrid::from_fn(5, 2, |i, j| Complex64::new((i * j) as f64, 0.0)).unwrap();
        let image = grid_to_image(&grid, label());
        assert!(image.imag_plane().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lte_subframe_shape() {
        let grid = TimeFreqGrid::zeros(72, 14).unwrap();
        assert_eq!(grid_to_image(&grid, label()).shape(), (72, 14, 2));
    }

    #[test]
    fn zero_image_gives_zero_grid() {
        let image = ChannelImage::new(4, 3, vec![0.0; 24], label(), None).unwrap();
        let grid = image_to_grid(&image);
        assert!(grid.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_non_finite_and_bad_sizes() {
        let err = TimeFreqGrid::new(1, 2, vec![Complex64::new(f64::NAN, 0.0); 2]).unwrap_err();
        assert_eq!(err, ImageError::NonFinite { index: 0 });
        assert!(matches!(
            TimeFreqGrid::new(2, 2, vec![Complex64::default(); 3]),
            Err(ImageError::SizeMismatch { .. })
        ));
        assert!(matches!(TimeFreqGrid::zeros(0, 3), Err(ImageError::EmptyDims { .. })));
        assert!(ChannelLabel::new("x", -1.0).is_err());
    }

    #[test]
    fn transpose_swaps_indices() {
        let grid = TimeFreqGrid::from_fn(3, 5, |i, j| Complex64::new(i as f64, j as f64)).unwrap();
        let t = grid.transpose();
        assert_eq!(t.dims(), (5, 3));
        assert_eq!(t.get(4, 2), grid.get(2, 4));
        assert_eq!(t.transpose(), grid);
    }

    #[test]
    fn global_max_scale() {
        let spec = fit_normalization([1.0, -4.0, 2.5, 0.0], NormalizationMethod::GlobalMax).unwrap();
        assert_eq!(spec.scale, 4.0);
    }

    #[test]
    fn all_zero_dataset_is_degenerate() {
        assert!(matches!(
            fit_normalization([0.0; 8], NormalizationMethod::GlobalMax),
            Err(ImageError::DegenerateScale(_))
        ));
        assert!(matches!(
            fit_normalization(std::iter::empty(), NormalizationMethod::GlobalPercentile),
            Err(ImageError::DegenerateScale(_))
        ));
    }

    #[test]
    fn percentile_method_clamps_outliers() {
        let mut values: Vec<f64> = (1..=10_000).map(|v| v as f64 / 10_000.0).collect();
        values[17] = 50.0;
        let spec = fit_normalization(values.iter().copied(), NormalizationMethod::GlobalPercentile).unwrap();
        assert!(spec.scale < 1.0);
        let inside = values.iter().filter(|v| v.abs() <= spec.scale).count();
        assert!(inside as f64 / values.len() as f64 >= 0.999);
        let clamped = spec.apply_slice(&mut values);
        assert!(values.iter().all(|v| v.abs() <= 1.0));
        assert!((1..=10).contains(&clamped));
    }

    #[test]
    fn normalized_refit_is_idempotent() {
        let mut image = grid_to_image(
            &TimeFreqGrid::from_fn(6, 7, |i, j| Complex64::new(i as f64 - 2.5, 0.3 * j as f64)).unwrap(),
            label(),
        );
        let spec = fit_normalization(image.planes().iter().copied(), NormalizationMethod::GlobalMax).unwrap();
        assert_eq!(image.normalize(spec), 0);
        let refit = fit_normalization(image.planes().iter().copied(), NormalizationMethod::GlobalMax).unwrap();
        assert!((refit.scale - 1.0).abs() < 1e-6);
    }

    fn grid_strategy() -> impl Strategy<Value = TimeFreqGrid> {
        (1usize..8, 1usize..8).prop_flat_map(|(m, n)| {
            prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), m * n).prop_map(move |v| {
                TimeFreqGrid::new(m, n, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn unnormalized_round_trip_is_bitwise(grid in grid_strategy()) {
            let image = grid_to_image(&grid, label());
            let back = image_to_grid(&image);
            prop_assert_eq!(&back, &grid);
            prop_assert_eq!(image.label, label());
        }

        #[test]
        fn normalized_round_trip_within_tolerance(grid in grid_strategy()) {
            let mut image = grid_to_image(&grid, label());
            let Ok(spec) = fit_normalization(image.planes().iter().copied(), NormalizationMethod::GlobalMax) else {
                return Ok(());
            };
            image.normalize(spec);
            prop_assert!(image.planes().iter().all(|v| v.abs() <= 1.0));
            let back = image_to_grid(&image);
            for (a, b) in back.values().iter().zip(grid.values()) {
                prop_assert!((a - b).norm() <= 1e-6 * b.norm().max(1e-300) || (a - b).norm() < 1e-12);
            }
        }
    }
}
