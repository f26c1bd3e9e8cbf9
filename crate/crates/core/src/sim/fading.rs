//! Sum-of-sinusoids fading per delay tap.
//!
//! Each tap is `g(t) = sum_n c_n exp(j(2 pi f_n t + theta_n))` with equal path
//! gains, Doppler shifts `f_n = f_d cos(alpha_n)` for uniform angles of
//! arrival, and uniform phases (Jakes model). The ensemble autocorrelation of
//! a tap is `P J0(2 pi f_d tau)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::profile::TapProfile;
use super::SimError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Maximum Doppler shift in Hz for a speed in km/h and a carrier in Hz.
pub fn max_doppler(speed_kmh: f64, carrier_hz: f64) -> Result<f64, SimError> {
    if !speed_kmh.is_finite() || !carrier_hz.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "speed and carrier must be finite (got {speed_kmh} km/h, {carrier_hz} Hz)"
        )));
    }
    if speed_kmh < 0.0 || carrier_hz <= 0.0 {
        return Err(SimError::InvalidArgument(format!(
            "need speed >= 0 and carrier > 0 (got {speed_kmh} km/h, {carrier_hz} Hz)"
        )));
    }
    Ok(speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT)
}

/// One propagation path of a tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: f64,
    /// Hz
    pub doppler: f64,
    /// radians in `[0, 2 pi)`
    pub phase: f64,
}

/// Draws `count` Jakes paths whose expected total power is `tap_power_db`.
///
/// Per path the generator is consumed as: angle of arrival, then phase.
pub fn sample_paths<R: Rng + ?Sized>(
    tap_power_db: f64,
    count: usize,
    max_doppler: f64,
    rng: &mut R,
) -> Result<Vec<PathComponent>, SimError> {
    if count == 0 {
        return Err(SimError::InvalidArgument("path count must be at least 1".into()));
    }
    if !tap_power_db.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "tap power {tap_power_db} dB is not finite"
        )));
    }
    if !(max_doppler.is_finite() && max_doppler >= 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "maximum Doppler must be finite and >= 0, got {max_doppler}"
        )));
    }
    let gain = (super::profile::db_to_linear(tap_power_db) / count as f64).sqrt();
    let paths = (0..count)
        .map(|_| {
            let angle: f64 = rng.gen_range(0.0..TAU);
            let phase: f64 = rng.gen_range(0.0..TAU);
            PathComponent {
                gain,
                doppler: max_doppler * angle.cos(),
                phase,
            }
        })
        .collect();
    Ok(paths)
}

/// Evaluates the multipath sum at time `t` (seconds).
pub fn complex_gain(paths: &[PathComponent], t: f64) -> Result<Complex64, SimError> {
    if paths.is_empty() {
        return Err(SimError::InvalidArgument("no paths to sum".into()));
    }
    if !t.is_finite() {
        return Err(SimError::InvalidArgument(format!("time {t} is not finite")));
    }
    Ok(paths
        .iter()
        .map(|p| Complex64::from_polar(p.gain, TAU * p.doppler * t + p.phase))
        .sum())
}

/// `H(f) = sum_l g_l exp(-j 2 pi f tau_l)` for each frequency in `freqs`.
pub fn frequency_response(
    tap_gains: &[Complex64],
    tap_delays: &[f64],
    freqs: &[f64],
) -> Result<Vec<Complex64>, SimError> {
    if tap_gains.len() != tap_delays.len() {
        return Err(SimError::InvalidArgument(format!(
            "{} tap gains but {} tap delays",
            tap_gains.len(),
            tap_delays.len()
        )));
    }
    Ok(freqs
        .iter()
        .map(|&f| {
            tap_gains
                .iter()
                .zip(tap_delays)
                .map(|(&g, &tau)| g * Complex64::from_polar(1.0, -TAU * f * tau))
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct TapFading {
    pub delay: f64,
    /// Linear mean power after normalizing the profile to unit total power.
    pub power: f64,
    pub paths: Vec<PathComponent>,
}

/// One random realization of every tap of a profile.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    taps: Vec<TapFading>,
}

impl FadingProcess {
    pub fn new<R: Rng + ?Sized>(
        profile: &TapProfile,
        paths_per_tap: usize,
        max_doppler: f64,
        rng: &mut R,
    ) -> Result<Self, SimError> {
        let taps = profile
            .taps()
            .iter()
            .zip(profile.normalized_powers())
            .map(|(tap, power)| {
                Ok(TapFading {
                    delay: tap.delay,
                    power,
                    paths: sample_paths(10.0 * power.log10(), paths_per_tap, max_doppler, rng)?,
                })
            })
            .collect::<Result<_, SimError>>()?;
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[TapFading] {
        &self.taps
    }

    pub fn delays(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.delay).collect()
    }

    pub fn tap_gains(&self, t: f64) -> Result<Vec<Complex64>, SimError> {
        self.taps.iter().map(|tap| complex_gain(&tap.paths, t)).collect()
    }
}

/// Random stream for sample `index` of a run seeded with `seed`.
///
/// The key is `seed` expanded by `ChaCha8Rng::seed_from_u64` and `index`
/// selects the ChaCha stream, so every sample draws from its own
/// counter-based substream regardless of scheduling.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn doppler_values() {
        assert_eq!(max_doppler(0.0, 2.1e9).unwrap(), 0.0);
        let fifty = max_doppler(50.0, 2.1e9).unwrap();
        let expected = (50.0 / 3.6) * 2.1e9 / 2.99792458e8;
        assert!((fifty - expected).abs() < 1e-9);
        assert!((fifty - 97.29).abs() < 0.005);
        assert_eq!(max_doppler(100.0, 2.1e9).unwrap(), 2.0 * fifty);
    }

    #[test]
    fn doppler_rejects_bad_input() {
        assert!(max_doppler(f64::NAN, 2.1e9).is_err());
        assert!(max_doppler(10.0, f64::INFINITY).is_err());
        assert!(max_doppler(-1.0, 2.1e9).is_err());
        assert!(max_doppler(1.0, 0.0).is_err());
    }

    #[test]
    fn single_static_path() {
        let mut rng = substream(1, 0);
        let paths = sample_paths(0.0, 1, 0.0, &mut rng).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].gain, 1.0);
        assert_eq!(paths[0].doppler, 0.0);
        assert!((0.0..TAU).contains(&paths[0].phase));
    }

    #[test]
    fn zero_paths_is_an_error() {
        let mut rng = substream(1, 0);
        assert!(sample_paths(0.0, 0, 10.0, &mut rng).is_err());
        assert!(sample_paths(0.0, 4, -1.0, &mut rng).is_err());
    }

    #[test]
    fn path_invariants() {
        let mut rng = substream(3, 9);
        for p in sample_paths(-7.0, 500, 120.0, &mut rng).unwrap() {
            assert!(p.gain >= 0.0);
            assert!(p.doppler.abs() <= 120.0);
            assert!((0.0..TAU).contains(&p.phase));
        }
    }

    // Time-average power of one realization, 10^4 samples 1 ms apart.
    fn time_average_power(tap_power_db: f64, seed: u64) -> f64 {
        let mut rng = substream(seed, 0);
        let paths = sample_paths(tap_power_db, 64, 100.0, &mut rng).unwrap();
        (0..10_000)
            .map(|k| complex_gain(&paths, k as f64 * 1e-3).unwrap().norm_sqr())
            .sum::<f64>()
            / 10_000.0
    }

    #[test]
    fn monte_carlo_tap_power() {
        let p = time_average_power(0.0, 2024);
        assert!((0.9..=1.1).contains(&p), "power {p}");
        let expected = 10f64.powf(-0.3);
        assert!((expected - 0.501).abs() < 1e-3);
        let p = time_average_power(-3.0, 2024);
        assert!((p / expected - 1.0).abs() < 0.1, "power {p}");
    }

    #[test]
    fn complex_gain_examples() {
        let stat = [PathComponent {
            gain: 1.0,
            doppler: 0.0,
            phase: 0.0,
        }];
        assert!(close(
            complex_gain(&stat, 123.4).unwrap(),
            Complex64::new(1.0, 0.0),
            1e-15
        ));
        let spin = [PathComponent {
            gain: 1.0,
            doppler: 10.0,
            phase: 0.0,
        }];
        assert!(close(
            complex_gain(&spin, 0.05).unwrap(),
            Complex64::new(-1.0, 0.0),
            1e-12
        ));
        let cancel = [
            PathComponent {
                gain: 1.0,
                doppler: 0.0,
                phase: 0.0,
            },
            PathComponent {
                gain: 1.0,
                doppler: 0.0,
                phase: std::f64::consts::PI,
            },
        ];
        assert!(close(
            complex_gain(&cancel, 0.7).unwrap(),
            Complex64::new(0.0, 0.0),
            1e-12
        ));
        assert!(complex_gain(&[], 0.0).is_err());
        assert!(complex_gain(&stat, f64::NAN).is_err());
    }

    #[test]
    fn flat_fading_with_zero_delay() {
        let g = Complex64::new(0.3, -0.4);
        let freqs: Vec<f64> = (0..16).map(|i| i as f64 * 15e3).collect();
        let h = frequency_response(&[g], &[0.0], &freqs).unwrap();
        assert!(h.iter().all(|&v| close(v, g, 1e-15)));
    }

    #[test]
    fn two_ray_null() {
        let (spacing, m, k) = (15e3, 72usize, 9usize);
        let freqs: Vec<f64> = (0..m).map(|i| i as f64 * spacing).collect();
        // phase difference 2 pi f_k tau = pi at subcarrier k
        let tau = 1.0 / (2.0 * spacing * k as f64);
        let g = Complex64::new(0.7, 0.2);
        let h = frequency_response(&[g, g], &[0.0, tau], &freqs).unwrap();
        assert!(h[k].norm() < 1e-12);
        let direct = g + g * Complex64::from_polar(1.0, -TAU * freqs[3] * tau);
        assert!(close(h[3], direct, 1e-12));
        assert!(h[0].norm() > 1.0);
    }

    #[test]
    fn zero_gains_and_mismatch() {
        let h = frequency_response(&[Complex64::default(); 3], &[0.0, 1e-6, 2e-6], &[0.0, 1e4, 2e4]).unwrap();
        assert!(h.iter().all(|v| v.norm() == 0.0));
        assert!(frequency_response(&[Complex64::default(); 2], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn substreams_are_distinct_and_stable() {
        let a: u64 = substream(7, 0).gen();
        let b: u64 = substream(7, 1).gen();
        let c: u64 = substream(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
