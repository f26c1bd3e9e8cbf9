//! Biased autocorrelation of quasi-periodic sequences and its dataset mean.
//!
//! The operand is the magnitude sequence `|s[k]|` with its mean removed, so
//! the result is real. The estimator divides by `L` at every lag, which keeps
//! its spectrum non-negative.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::sequence::{grid_to_sequence, Scheme, Sequence1D};
use super::MetricsError;
use crate::dataset::Dataset;
use crate::image::TimeFreqGrid;

/// `R[m] = (1/L) sum_{k=0}^{L-1-m} x[k] x[k+m]` for `m` in `0..L`, via a
/// zero-padded FFT.
pub fn biased_autocorr(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let nfft = (2 * len - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(nfft).process(&mut buf);
    buf.iter_mut().for_each(|v| *v = Complex64::new(v.norm_sqr(), 0.0));
    planner.plan_fft_inverse(nfft).process(&mut buf);
    let scale = 1.0 / (nfft as f64 * len as f64);
    buf[..len].iter().map(|v| v.re * scale).collect()
}

/// `|s[k]|` minus its mean.
pub fn centered_magnitudes(seq: &Sequence1D) -> Vec<f64> {
    let mags = seq.magnitudes();
    let mean = mags.iter().sum::<f64>() / mags.len().max(1) as f64;
    mags.into_iter().map(|v| v - mean).collect()
}

/// Autocorrelation of a sequence's centred magnitude.
pub fn autocorr(seq: &Sequence1D) -> Result<Vec<f64>, MetricsError> {
    if seq.is_empty() {
        return Err(MetricsError::InvalidArgument("empty sequence".into()));
    }
    Ok(biased_autocorr(&centered_magnitudes(seq)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocorrMean {
    /// Lags `0..L`.
    pub values: Vec<f64>,
    pub sample_count: usize,
    pub scheme: Scheme,
}

const CHUNK: usize = 64;

fn pairwise_sum(vectors: &[Vec<f64>]) -> Vec<f64> {
    match vectors {
        [] => Vec::new(),
        [single] => single.clone(),
        _ => {
            let (left, right) = vectors.split_at(vectors.len() / 2);
            let mut sum = pairwise_sum(left);
            for (a, b) in sum.iter_mut().zip(pairwise_sum(right)) {
                *a += b;
            }
            sum
        }
    }
}

/// Mean of per-sample vectors. Fixed-size chunks are computed in parallel and
/// reduced pairwise in index order, so the result does not depend on the
/// thread count.
fn ordered_mean<F>(count: usize, per_sample: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    let chunk_sums: Vec<Vec<f64>> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let vectors: Vec<Vec<f64>> = (c * CHUNK..((c + 1) * CHUNK).min(count)).map(&per_sample).collect();
            pairwise_sum(&vectors)
        })
        .collect();
    let mut mean = pairwise_sum(&chunk_sums);
    mean.iter_mut().for_each(|v| *v /= count as f64);
    mean
}

/// Elementwise mean of the per-grid autocorrelations.
pub fn mean_autocorr_grids(grids: &[TimeFreqGrid], scheme: Scheme) -> Result<AutocorrMean, MetricsError> {
    let first = grids
        .first()
        .ok_or_else(|| MetricsError::InvalidArgument("no grids to average".into()))?;
    if let Some((i, g)) = grids.iter().enumerate().find(|(_, g)| g.dims() != first.dims()) {
        return Err(MetricsError::InvalidArgument(format!(
            "grid {i} is {}x{}, grid 0 is {}x{}",
            g.m(),
            g.n(),
            first.m(),
            first.n()
        )));
    }
    let values = ordered_mean(grids.len(), |i| {
        biased_autocorr(&centered_magnitudes(&grid_to_sequence(&grids[i], scheme)))
    });
    Ok(AutocorrMean {
        values,
        sample_count: grids.len(),
        scheme,
    })
}

pub fn mean_autocorr(dataset: &Dataset, scheme: Scheme) -> Result<AutocorrMean, MetricsError> {
    if dataset.is_empty() {
        return Err(MetricsError::InvalidArgument("dataset is empty".into()));
    }
    let values = ordered_mean(dataset.len(), |i| {
        biased_autocorr(&centered_magnitudes(&grid_to_sequence(&dataset.grid(i), scheme)))
    });
    Ok(AutocorrMean {
        values,
        sample_count: dataset.len(),
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_dataset, SimConfig, TapProfile};
    use rand::{Rng, SeedableRng};

    fn brute(x: &[f64]) -> Vec<f64> {
        let len = x.len();
        (0..len)
            .map(|m| (0..len - m).map(|k| x[k] * x[k + m]).sum::<f64>() / len as f64)
            .collect()
    }

    #[test]
    fn unit_constant_closed_form() {
        let r = biased_autocorr(&[1.0; 37]);
        for (m, v) in r.iter().enumerate() {
            assert!((v - (37 - m) as f64 / 37.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lag_zero_is_mean_square() {
        let x = [0.3, -1.2, 2.0, 0.0, 5.5];
        let r = biased_autocorr(&x);
        let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((r[0] - ms).abs() < 1e-12);
    }

    #[test]
    fn matches_double_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for len in [1, 2, 3, 17, 64, 1008] {
            let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fast = biased_autocorr(&x);
            let slow = brute(&x);
            let scale = slow[0].abs().max(1e-300);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9 * scale, "len {len}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn centred_constant_is_zero() {
        let seq = Sequence1D {
            values: vec![Complex64::new(0.0, 2.0); 10],
            scheme: Scheme::FreqConcat,
            source_index: None,
        };
        assert!(autocorr(&seq).unwrap().iter().all(|v| v.abs() < 1e-15));
        let empty = Sequence1D { values: vec![], ..seq };
        assert!(autocorr(&empty).is_err());
    }

    fn tiny_config() -> SimConfig {
        SimConfig {
            num_subcarriers: 8,
            num_slots: 4,
            seed: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn identical_grids_average_to_one_autocorr() {
        let grid = crate::sim::generate_grid(&tiny_config(), &TapProfile::etu()).unwrap();
        let mean = mean_autocorr_grids(&vec![grid.clone(); 5], Scheme::FreqConcat).unwrap();
        let single = autocorr(&grid_to_sequence(&grid, Scheme::FreqConcat)).unwrap();
        for (a, b) in mean.values.iter().zip(&single) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_sample_mean_by_hand() {
        let ds = generate_dataset(&tiny_config(), &TapProfile::eva(), 2).unwrap();
        let mean = mean_autocorr(&ds, Scheme::TimeConcat).unwrap();
        let a = autocorr(&grid_to_sequence(&ds.grid(0), Scheme::TimeConcat)).unwrap();
        let b = autocorr(&grid_to_sequence(&ds.grid(1), Scheme::TimeConcat)).unwrap();
        for (k, v) in mean.values.iter().enumerate() {
            assert!((v - 0.5 * (a[k] + b[k])).abs() < 1e-15);
        }
        assert_eq!(mean.sample_count, 2);
        assert_eq!(mean.values.len(), 32);
    }

    #[test]
    fn mean_equals_mean_of_half_means() {
        let ds = generate_dataset(&tiny_config(), &TapProfile::etu(), 200).unwrap();
        let (a, b) = crate::dataset::split_dataset(&ds, 0.5, 1).unwrap();
        let full = mean_autocorr(&ds, Scheme::FreqConcat).unwrap();
        let ma = mean_autocorr(&a, Scheme::FreqConcat).unwrap();
        let mb = mean_autocorr(&b, Scheme::FreqConcat).unwrap();
        for k in 0..full.values.len() {
            assert!((full.values[k] - 0.5 * (ma.values[k] + mb.values[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn lag_zero_dominates() {
        let ds = generate_dataset(&tiny_config(), &TapProfile::ped_a(), 50).unwrap();
        let mean = mean_autocorr(&ds, Scheme::IfftTime).unwrap();
        assert!(mean.values.iter().all(|v| v.abs() <= mean.values[0]));
    }

    #[test]
    fn mixed_sizes_rejected() {
        let grids = vec![TimeFreqGrid::zeros(2, 2).unwrap(), TimeFreqGrid::zeros(2, 3).unwrap()];
        assert!(mean_autocorr_grids(&grids, Scheme::FreqConcat).is_err());
        assert!(mean_autocorr_grids(&[], Scheme::FreqConcat).is_err());
        assert!(mean_autocorr(&Dataset::new(2, 2).unwrap(), Scheme::FreqConcat).is_err());
    }

    proptest::proptest! {
        #[test]
        fn cauchy_schwarz(x in proptest::collection::vec(-10.0f64..10.0, 1..300)) {
            let r = biased_autocorr(&x);
            for v in &r {
                proptest::prop_assert!(v.abs() <= r[0] * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}
