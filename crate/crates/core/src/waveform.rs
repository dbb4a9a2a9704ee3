//! FMCW radar parameters, receive IF samples and the sensing matrix `Z`.
//!
//! For one interaction vector `ψ_m`, sample `s` of the IF signal is
//!
//! ```text
//! z[s,m] = Σ_paths √ρ · e^{-jϑ} · e^{+jΞ(s)} + w[s,m] · e^{jχ[s]}
//! ρ = P_T·|h[m]|²,  ϑ = Arg h[m]
//! Ξ(s) = 2π (f0·ξ + S·t·ξ − S/2·ξ²),  χ[s] = 2π f0·t + π S t²,  t = s/F_S,  ξ = R/c
//! ```
//!
//! Units: the transmit scale `P_T` is the transmit power in mW, so `ρ` is a
//! received power in mW. The thermal noise variance uses the same scale:
//! `σ_w² = kT·BW·NF` with `kT = −174 dBm/Hz`. Only the SNR is meaningful.
//!
//! Noise is drawn from a ChaCha stream keyed by `(seed, m)`, so each column
//! is reproducible on its own and the sweep gives identical output for any
//! worker count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelEvaluator;
use crate::codebook::Codebook;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Thermal noise density at 290 K (dBm/Hz).
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Relative slack allowed when checking that the ADC window fits in the
/// chirp, so that parameters quoted to a few digits still validate.
pub const SAMPLING_WINDOW_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Starting chirp frequency `f0` (Hz).
    pub f0: f64,
    /// Chirp slope `S` (Hz/s).
    pub slope: f64,
    /// Chirp duration `T_active` (s).
    pub t_active: f64,
    /// Chirp repetition interval `T_PRI` (s).
    pub t_pri: f64,
    /// ADC sampling rate `F_S` (Hz).
    pub fs: f64,
    /// ADC samples per chirp.
    pub m_sample: usize,
    /// Transmit scale `P_T` (linear mW).
    pub tx_power_mw: f64,
    pub noise_figure_db: f64,
    /// Add receiver noise.
    pub thermal_noise: bool,
    pub rng_seed: u64,
}

impl RadarConfig {
    /// 60 GHz, 300 MHz/µs, 38 MS/s, 512 samples per chirp, one chirp per
    /// PRI, 20 dBm transmit power and a 10 dB noise figure. The chirp fills
    /// the ADC window exactly: `T_active = T_PRI = 512 / 38 MS/s ≈ 13.47 µs`.
    pub fn reference() -> Self {
        let fs = 38e6;
        let m_sample = 512;
        let t = m_sample as f64 / fs;
        Self {
            f0: 60e9,
            slope: 300e6 / 1e-6,
            t_active: t,
            t_pri: t,
            fs,
            m_sample,
            tx_power_mw: dbm_to_mw(20.0),
            noise_figure_db: 10.0,
            thermal_noise: true,
            rng_seed: 0,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.fs
    }

    /// Every violated constraint, as a human-readable message.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.f0) {
            v.push(format!(
                "starting frequency must be positive (got {})",
                self.f0
            ));
        }
        if !positive(self.slope) {
            v.push(format!("chirp slope must be positive (got {})", self.slope));
        }
        if !positive(self.fs) {
            v.push(format!("sampling rate must be positive (got {})", self.fs));
        }
        if self.m_sample == 0 {
            v.push("samples per chirp must be at least 1".into());
        }
        if !positive(self.t_active) {
            v.push(format!(
                "chirp duration must be positive (got {})",
                self.t_active
            ));
        }
        if !positive(self.t_pri) {
            v.push(format!(
                "chirp repetition interval must be positive (got {})",
                self.t_pri
            ));
        }
        if positive(self.fs) && positive(self.t_active) && self.m_sample > 0 {
            let window = self.m_sample as f64 / self.fs;
            if window > self.t_active * (1.0 + SAMPLING_WINDOW_TOLERANCE) {
                v.push(format!(
                    "sampling window exceeds chirp ({} samples at {} Hz last {window:e} s, chirp is {:e} s)",
                    self.m_sample, self.fs, self.t_active
                ));
            }
        }
        if positive(self.t_active) && positive(self.t_pri) && self.t_active > self.t_pri {
            v.push(format!(
                "chirp exceeds PRI ({:e} s > {:e} s)",
                self.t_active, self.t_pri
            ));
        }
        if !(self.tx_power_mw >= 0.0 && self.tx_power_mw.is_finite()) {
            v.push(format!(
                "transmit power must be finite and non-negative (got {} mW)",
                self.tx_power_mw
            ));
        }
        if !self.noise_figure_db.is_finite() {
            v.push("noise figure must be finite".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidRadar(v.join("; ")))
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// `BW = S·T_active` (Hz).
    pub bandwidth_hz: f64,
    /// `Δ_R = c / (2·BW)` (m).
    pub range_resolution_m: f64,
    /// `R_max = F_S·c / (2·S)` (m).
    pub max_range_m: f64,
    /// `F_chirp = 1 / T_PRI` (Hz).
    pub chirp_rate_hz: f64,
}

impl DerivedParams {
    /// Depth-map refresh rate `F_DM = F_chirp / M` for a codebook of size `m`.
    pub fn depth_map_rate_hz(&self, m: usize) -> f64 {
        self.chirp_rate_hz / m as f64
    }
}

pub fn derived_params(cfg: &RadarConfig) -> DerivedParams {
    let bw = cfg.slope * cfg.t_active;
    DerivedParams {
        bandwidth_hz: bw,
        range_resolution_m: SPEED_OF_LIGHT / (2.0 * bw),
        max_range_m: cfg.fs * SPEED_OF_LIGHT / (2.0 * cfg.slope),
        chirp_rate_hz: 1.0 / cfg.t_pri,
    }
}

/// Receiver noise power `kT·BW·NF` in mW.
pub fn noise_power_mw(cfg: &RadarConfig) -> f64 {
    let bw = cfg.slope * cfg.t_active;
    dbm_to_mw(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bw.log10() + cfg.noise_figure_db)
}

/// One path's contribution to a column: its gain under `ψ_m` and its
/// round-trip distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathReturn {
    pub gain: Complex64,
    pub total_distance: f64,
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

fn check_delay(total_distance: f64, cfg: &RadarConfig) -> Result<f64> {
    let xi = total_distance / SPEED_OF_LIGHT;
    if xi.is_nan() || xi >= cfg.t_active {
        return Err(Error::RangeOverflow {
            delay_s: xi,
            t_active_s: cfg.t_active,
        });
    }
    Ok(xi)
}

/// IF samples `z[·, column]` for the given path returns.
///
/// `column` selects the noise stream; it has no effect without thermal noise.
pub fn if_signal(
    returns: &[PathReturn],
    cfg: &RadarConfig,
    column: usize,
) -> Result<Vec<Complex64>> {
    let n = cfg.m_sample;
    let ts = cfg.sample_period();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for r in returns {
        let xi = check_delay(r.total_distance, cfg)?;
        let amp = (cfg.tx_power_mw * r.gain.norm_sqr()).sqrt();
        if amp == 0.0 {
            continue;
        }
        let theta = r.gain.arg();
        // constant part of Ξ in cycles: f0·ξ − (S/2)·ξ²
        let c0 = frac(cfg.f0 * xi) - frac(0.5 * cfg.slope * xi * xi);
        let beat = cfg.slope * xi;
        for (s, zs) in z.iter_mut().enumerate() {
            let t = s as f64 * ts;
            let cycles = frac(c0 + frac(beat * t));
            *zs += Complex64::from_polar(amp, 2.0 * PI * cycles - theta);
        }
    }
    if cfg.thermal_noise {
        add_noise(&mut z, cfg, column);
    }
    Ok(z)
}

fn add_noise(z: &mut [Complex64], cfg: &RadarConfig, column: usize) {
    let sigma = (noise_power_mw(cfg) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(column as u64);
    let ts = cfg.sample_period();
    for (s, zs) in z.iter_mut().enumerate() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let t = s as f64 * ts;
        let chi = frac(cfg.f0 * t) + frac(0.5 * cfg.slope * t * t);
        *zs += Complex64::new(sigma * re, sigma * im) * Complex64::from_polar(1.0, 2.0 * PI * chi);
    }
}

/// Receive sensing matrix, `M_sample × M`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    m_sample: usize,
    m: usize,
    data: Vec<Complex64>,
    /// Seed the noise was drawn with.
    pub seed: u64,
}

impl SensingMatrix {
    pub fn from_column_major(
        m_sample: usize,
        m: usize,
        data: Vec<Complex64>,
        seed: u64,
    ) -> Result<Self> {
        if data.len() != m_sample * m {
            return Err(Error::DimensionMismatch {
                expected: m_sample * m,
                actual: data.len(),
            });
        }
        Ok(Self {
            m_sample,
            m,
            data,
            seed,
        })
    }

    pub fn from_columns(columns: Vec<Vec<Complex64>>, seed: u64) -> Result<Self> {
        let m = columns.len();
        let m_sample = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * m_sample);
        for c in columns {
            if c.len() != m_sample {
                return Err(Error::DimensionMismatch {
                    expected: m_sample,
                    actual: c.len(),
                });
            }
            data.extend(c);
        }
        Ok(Self {
            m_sample,
            m,
            data,
            seed,
        })
    }

    pub fn m_sample(&self) -> usize {
        self.m_sample
    }

    /// Number of columns (beams).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.m_sample..(m + 1) * self.m_sample]
    }

    pub fn as_column_major(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, s: usize, m: usize) -> Complex64 {
        self.data[m * self.m_sample + s]
    }
}

/// Sweeps the codebook: column `m` holds the IF samples received with `ψ_m`.
pub fn sweep(
    channel: &ChannelEvaluator,
    codebook: &Codebook,
    cfg: &RadarConfig,
) -> Result<SensingMatrix> {
    cfg.validate()?;
    if codebook.is_empty() {
        return Err(Error::DegenerateGrid("empty codebook".into()));
    }
    if codebook.elements() != channel.elements() {
        return Err(Error::DimensionMismatch {
            expected: channel.elements(),
            actual: codebook.elements(),
        });
    }
    for p in channel.paths() {
        check_delay(p.total_distance(), cfg)?;
    }
    let columns = (0..codebook.len())
        .into_par_iter()
        .map(|m| {
            let psi = codebook.vector(m);
            let returns: Vec<PathReturn> = channel
                .paths()
                .iter()
                .map(|p| {
                    Ok(PathReturn {
                        gain: p.gain(&psi)?,
                        total_distance: p.total_distance(),
                    })
                })
                .collect::<Result<_>>()?;
            if_signal(&returns, cfg, m)
        })
        .collect::<Result<Vec<_>>>()?;
    SensingMatrix::from_columns(columns, cfg.rng_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn noiseless() -> RadarConfig {
        RadarConfig {
            thermal_noise: false,
            ..RadarConfig::reference()
        }
    }

    #[test]
    fn reference_derived_values() {
        let d = derived_params(&RadarConfig::reference());
        assert_relative_eq!(d.bandwidth_hz, 4.04e9, max_relative = 5e-3);
        assert_relative_eq!(d.range_resolution_m, 0.0371, max_relative = 5e-3);
        assert_relative_eq!(d.max_range_m, 18.95, max_relative = 5e-3);
        assert_relative_eq!(d.chirp_rate_hz, 74.2e3, max_relative = 5e-3);
        assert_relative_eq!(d.depth_map_rate_hz(14_400), 5.15, max_relative = 5e-3);
        assert_relative_eq!(d.depth_map_rate_hz(25_600), 2.90, max_relative = 5e-3);
    }

    #[test]
    fn doubling_slope_halves_resolution() {
        let a = RadarConfig::reference();
        let b = RadarConfig {
            slope: 2.0 * a.slope,
            ..a.clone()
        };
        assert_relative_eq!(
            derived_params(&b).range_resolution_m,
            derived_params(&a).range_resolution_m / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn reference_validates_and_quoted_values_too() {
        assert!(RadarConfig::reference().violations().is_empty());
        let quoted = RadarConfig {
            t_active: 13.47e-6,
            t_pri: 13.47e-6,
            ..RadarConfig::reference()
        };
        assert!(quoted.violations().is_empty());
    }

    #[test]
    fn chirp_longer_than_pri_is_named() {
        let cfg = RadarConfig {
            t_pri: 10e-6,
            ..RadarConfig::reference()
        };
        let v = cfg.violations();
        assert!(v.iter().any(|m| m.contains("chirp exceeds PRI")), "{v:?}");
    }

    #[test]
    fn short_chirp_is_rejected() {
        let cfg = RadarConfig {
            t_active: 5e-6,
            ..RadarConfig::reference()
        };
        assert!(cfg
            .violations()
            .iter()
            .any(|m| m.contains("sampling window")));
    }

    #[test]
    fn noise_floor() {
        let p = noise_power_mw(&RadarConfig::reference());
        assert_relative_eq!(mw_to_dbm(p), -67.9, epsilon = 0.05);
        // −174 + 10·log10(BW) + 10, computed independently
        let bw = 300e6 / 1e-6 * 512.0 / 38e6;
        assert_relative_eq!(
            mw_to_dbm(p),
            -174.0 + 10.0 * f64::log10(bw) + 10.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn single_path_has_constant_modulus_and_beat_frequency() {
        let cfg = noiseless();
        let h = Complex64::from_polar(1e-3, 0.4);
        let r = PathReturn {
            gain: h,
            total_distance: 10.0,
        };
        let z = if_signal(&[r], &cfg, 0).unwrap();
        let rho = cfg.tx_power_mw * h.norm_sqr();
        for zs in &z {
            assert_relative_eq!(zs.norm(), rho.sqrt(), max_relative = 1e-9);
        }
        let xi = 10.0 / SPEED_OF_LIGHT;
        let step = 2.0 * PI * cfg.slope * xi / cfg.fs;
        for s in 1..z.len() {
            let d = (z[s] / z[s - 1]).arg();
            assert!((d - crate::geometry::wrap_angle(step)).abs() < 1e-6);
        }
        // energy
        let e: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        assert_relative_eq!(e, cfg.m_sample as f64 * rho, max_relative = 1e-9);
    }

    #[test]
    fn ten_meter_round_trip_lands_in_bin_135() {
        let cfg = noiseless();
        let xi = 10.0 / SPEED_OF_LIGHT;
        assert_relative_eq!(xi, 33.36e-9, max_relative = 1e-3);
        let f_if = cfg.slope * xi;
        assert_relative_eq!(f_if, 10.0e6, max_relative = 1e-3);
        assert_eq!((f_if / cfg.fs * cfg.m_sample as f64).round(), 135.0);
        let z = if_signal(
            &[PathReturn {
                gain: Complex64::new(1e-3, 0.0),
                total_distance: 10.0,
            }],
            &cfg,
            0,
        )
        .unwrap();
        // brute-force DFT magnitude peak
        let n = z.len();
        let peak = (0..n)
            .map(|k| {
                z.iter()
                    .enumerate()
                    .map(|(s, x)| {
                        x * Complex64::from_polar(1.0, -2.0 * PI * (k * s % n) as f64 / n as f64)
                    })
                    .sum::<Complex64>()
                    .norm()
            })
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (k, m)| if m > best.1 { (k, m) } else { best },
            );
        assert_eq!(peak.0, 135);
    }

    #[test]
    fn empty_noiseless_column_is_zero() {
        let z = if_signal(&[], &noiseless(), 3).unwrap();
        assert!(z.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn range_overflow() {
        let cfg = noiseless();
        let too_far = cfg.t_active * SPEED_OF_LIGHT;
        let err = if_signal(
            &[PathReturn {
                gain: Complex64::new(1.0, 0.0),
                total_distance: too_far,
            }],
            &cfg,
            0,
        );
        assert!(matches!(err, Err(Error::RangeOverflow { .. })));
    }

    #[test]
    fn noise_is_reproducible_and_has_the_right_power() {
        let cfg = RadarConfig {
            m_sample: 4096,
            fs: 4096.0 / (512.0 / 38e6),
            ..RadarConfig::reference()
        };
        let a = if_signal(&[], &cfg, 5).unwrap();
        let b = if_signal(&[], &cfg, 5).unwrap();
        let c = if_signal(&[], &cfg, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let p: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>() / a.len() as f64;
        assert_relative_eq!(p, noise_power_mw(&cfg), max_relative = 0.1);
        let other_seed = RadarConfig { rng_seed: 1, ..cfg };
        assert_ne!(a, if_signal(&[], &other_seed, 5).unwrap());
    }

    #[test]
    fn sensing_matrix_shape_checks() {
        let err = SensingMatrix::from_columns(
            vec![vec![Complex64::default(); 3], vec![Complex64::default(); 2]],
            0,
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let z = SensingMatrix::from_column_major(2, 3, vec![Complex64::default(); 6], 0).unwrap();
        assert_eq!((z.m_sample(), z.m()), (2, 3));
        assert!(SensingMatrix::from_column_major(2, 3, vec![Complex64::default(); 5], 0).is_err());
    }
}
