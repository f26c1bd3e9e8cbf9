//! Real cepstrum of a mean autocorrelation and the cepstral distance.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Default log floor, relative to the largest spectral magnitude.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Default number of lower cepstral coefficients compared by [`cdm`].
pub const DEFAULT_K: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CepstrumVector {
    pub coefficients: Vec<f64>,
    /// Absolute magnitude floor that was applied before the log.
    pub epsilon_floor: f64,
}

/// `real(IFFT(log(max(|FFT(x)|, floor))))` with `floor = epsilon * max|FFT(x)|`.
///
/// The transform length equals the input length; the inverse is normalized
/// by `1/L`.
pub fn cepstrum(values: &[f64], epsilon: f64) -> Result<CepstrumVector, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::InvalidArgument("cepstrum of an empty vector".into()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MetricsError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let len = values.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(len).process(&mut buf);

    let peak = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = epsilon * peak;
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm().max(floor).ln(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let coefficients: Vec<f64> = buf.iter().map(|v| v.re / len as f64).collect();
    if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(MetricsError::Numerical(format!(
            "cepstral coefficient {i} is not finite (log floor {floor})"
        )));
    }
    Ok(CepstrumVector {
        coefficients,
        epsilon_floor: floor,
    })
}

/// Mean squared difference of the first `k` coefficients.
pub fn cdm(a: &[f64], b: &[f64], k: usize) -> Result<f64, MetricsError> {
    if k == 0 || k > a.len() || k > b.len() {
        return Err(MetricsError::InvalidArgument(format!(
            "K = {k} must be in 1..={}",
            a.len().min(b.len())
        )));
    }
    Ok(a[..k].iter().zip(&b[..k]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / k as f64)
}
