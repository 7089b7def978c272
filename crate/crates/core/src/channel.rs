//! Multipath channel emulation: Rayleigh tap draws, tapped-delay-line
//! filtering with effective complex coefficients, AWGN at a target SNR, and
//! timing-offset insertion for synchronization experiments.
//!
//! Carrier effects are folded into the tap gains: a path with physical delay
//! `tau` and amplitude `a` contributes the effective coefficient
//! `a * exp(-j*2*pi*f_c*tau)`, so the whole simulation stays at complex
//! baseband. Taps are constant over one packet (block fading).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::chirp::BasebandSignal;
use crate::error::{McdmError, Result};

/// Statistical description of the multipath environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    /// Path delays in seconds, strictly increasing, first entry 0.
    delays: Vec<f64>,
    /// Relative mean linear power per path, normalized to sum 1.
    mean_powers: Vec<f64>,
    /// Carrier frequency folded into the effective coefficients.
    f_c: f64,
}

impl ChannelProfile {
    pub fn new(delays: Vec<f64>, mean_powers: Vec<f64>, f_c: f64) -> Result<Self> {
        if delays.is_empty() || delays.len() != mean_powers.len() {
            return Err(McdmError::Config(format!(
                "need matching non-empty delay/power lists, got {}/{}",
                delays.len(),
                mean_powers.len()
            )));
        }
        if delays[0] != 0.0 {
            return Err(McdmError::Config("first path delay must be 0".into()));
        }
        if delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(McdmError::Config("path delays must be strictly increasing".into()));
        }
        if mean_powers.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
            return Err(McdmError::Config("path powers must be positive".into()));
        }
        let sum: f64 = mean_powers.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(McdmError::Config(format!("path powers must sum to 1, got {sum}")));
        }
        Ok(Self { delays, mean_powers, f_c })
    }

    /// Normalize the given powers to sum 1, then construct.
    pub fn with_normalized_powers(delays: Vec<f64>, powers: Vec<f64>, f_c: f64) -> Result<Self> {
        let sum: f64 = powers.iter().sum();
        if sum <= 0.0 {
            return Err(McdmError::Config("path powers must sum to a positive value".into()));
        }
        let normalized = powers.iter().map(|p| p / sum).collect();
        Self::new(delays, normalized, f_c)
    }

    /// Single path, unit gain, zero delay: the identity channel.
    pub fn identity() -> Self {
        Self { delays: vec![0.0], mean_powers: vec![1.0], f_c: 0.0 }
    }

    /// Default four-path shallow-water style profile: a dominant direct path
    /// plus a bounce cluster at 0.505/0.63/0.78 ms.
    pub fn default_four_path() -> Self {
        Self {
            delays: vec![0.0, 0.505e-3, 0.63e-3, 0.78e-3],
            mean_powers: vec![0.60, 0.16, 0.13, 0.11],
            f_c: 100e3,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.delays.len()
    }
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }
    pub fn mean_powers(&self) -> &[f64] {
        &self.mean_powers
    }
    pub fn f_c(&self) -> f64 {
        self.f_c
    }
    pub fn max_delay(&self) -> f64 {
        *self.delays.last().unwrap()
    }
    pub fn total_power(&self) -> f64 {
        self.mean_powers.iter().sum()
    }

    /// Carrier phase factor exp(-j*2*pi*f_c*tau) using the exact
    /// (pre-rounding) delay.
    fn carrier_phase(&self, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.f_c * self.delays[m])
    }
}

/// One tap of a drawn channel: integer sample delay and effective gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_samples: usize,
    pub gain: Complex64,
}

/// One block-fading realization; fixed for one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Tap>,
}

impl ChannelRealization {
    /// Single unit-gain tap at delay zero.
    pub fn identity() -> Self {
        Self { taps: vec![Tap { delay_samples: 0, gain: Complex64::new(1.0, 0.0) }] }
    }

    pub fn max_delay_samples(&self) -> usize {
        self.taps.iter().map(|t| t.delay_samples).max().unwrap_or(0)
    }

    /// Frequency response at the `n` subcarrier bins: the DFT of the tap
    /// impulse response.
    pub fn freq_response(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                self.taps
                    .iter()
                    .map(|t| {
                        t.gain
                            * Complex64::from_polar(
                                1.0,
                                -2.0 * PI * ((k * t.delay_samples) % n) as f64 / n as f64,
                            )
                    })
                    .sum()
            })
            .collect()
    }
}

/// Draw per-path effective gains: circular complex Gaussian of variance
/// `mean_power` (Rayleigh magnitude) times the carrier phase. Deterministic
/// in the RNG state.
pub fn draw_gains<R: Rng>(profile: &ChannelProfile, rng: &mut R) -> Vec<Complex64> {
    profile
        .mean_powers
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (p / 2.0).sqrt() * profile.carrier_phase(m)
        })
        .collect()
}

/// Quantize the profile's delays at `fs` and attach the given gains.
pub fn realize_with_gains(
    profile: &ChannelProfile,
    gains: &[Complex64],
    fs: f64,
) -> ChannelRealization {
    let taps = profile
        .delays
        .iter()
        .zip(gains)
        .map(|(&tau, &gain)| Tap { delay_samples: (tau * fs).round() as usize, gain })
        .collect();
    ChannelRealization { taps }
}

/// Draw a block-fading realization; fixed for one packet.
pub fn draw_channel<R: Rng>(profile: &ChannelProfile, fs: f64, rng: &mut R) -> ChannelRealization {
    let gains = draw_gains(profile, rng);
    realize_with_gains(profile, &gains, fs)
}

/// The deterministic mean-power realization: gains sqrt(p_m) times the
/// carrier phase. Used where a known (non-fading) channel is wanted.
pub fn fixed_realization(profile: &ChannelProfile, fs: f64) -> ChannelRealization {
    let taps = profile
        .delays
        .iter()
        .zip(&profile.mean_powers)
        .enumerate()
        .map(|(m, (&tau, &p))| Tap {
            delay_samples: (tau * fs).round() as usize,
            gain: p.sqrt() * profile.carrier_phase(m),
        })
        .collect();
    ChannelRealization { taps }
}

/// Tapped delay line: `y[n] = sum_m gain_m * x[n - delay_m]`, zero-padded
/// edges. Output length is input length plus the maximum delay.
pub fn apply_channel(x: &BasebandSignal, ch: &ChannelRealization) -> BasebandSignal {
    let max_d = ch.max_delay_samples();
    let mut out = vec![Complex64::ZERO; x.len() + max_d];
    for tap in &ch.taps {
        for (i, &xi) in x.samples().iter().enumerate() {
            out[i + tap.delay_samples] += tap.gain * xi;
        }
    }
    BasebandSignal::new(out, x.fs()).expect("fs carried from input")
}

/// Add independent circular complex Gaussian noise with per-sample variance
/// `signal_power_ref / 10^(snr_db/10)`. A `snr_db` of +infinity returns the
/// input unchanged.
pub fn add_awgn<R: Rng>(
    x: &BasebandSignal,
    snr_db: f64,
    signal_power_ref: f64,
    rng: &mut R,
) -> Result<BasebandSignal> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok(x.clone());
    }
    if !(signal_power_ref > 0.0 && signal_power_ref.is_finite()) {
        return Err(McdmError::Config(format!(
            "signal power reference must be positive, got {signal_power_ref}"
        )));
    }
    let sigma2 = signal_power_ref / 10f64.powf(snr_db / 10.0);
    let s = (sigma2 / 2.0).sqrt();
    let samples = x
        .samples()
        .iter()
        .map(|&xi| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            xi + Complex64::new(re * s, im * s)
        })
        .collect();
    BasebandSignal::new(samples, x.fs())
}

/// Prepend `offset` noise-only samples of the given variance.
pub fn insert_offset<R: Rng>(
    x: &BasebandSignal,
    offset: usize,
    rng: &mut R,
    noise_var: f64,
) -> BasebandSignal {
    let s = (noise_var / 2.0).sqrt();
    let mut samples = Vec::with_capacity(offset + x.len());
    for _ in 0..offset {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        samples.push(Complex64::new(re * s, im * s));
    }
    samples.extend_from_slice(x.samples());
    BasebandSignal::new(samples, x.fs()).expect("fs carried from input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    fn tone(n: usize) -> BasebandSignal {
        BasebandSignal::new(
            (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * 0.1 * i as f64))
                .collect(),
            1000.0,
        )
        .unwrap()
    }

    #[test]
    fn profile_rejects_bad_shapes() {
        assert!(ChannelProfile::new(vec![], vec![], 0.0).is_err());
        assert!(ChannelProfile::new(vec![0.1], vec![1.0], 0.0).is_err());
        assert!(ChannelProfile::new(vec![0.0, 0.0], vec![0.5, 0.5], 0.0).is_err());
        assert!(ChannelProfile::new(vec![0.0, 1e-3], vec![0.5, 0.4], 0.0).is_err());
        assert!(ChannelProfile::with_normalized_powers(vec![0.0, 1e-3], vec![3.0, 1.0], 0.0)
            .is_ok());
    }

    #[test]
    fn identity_channel_is_identity() {
        let x = tone(64);
        let y = apply_channel(&x, &ChannelRealization::identity());
        assert_eq!(x.samples(), y.samples());
    }

    #[test]
    fn single_tap_scales_and_shifts() {
        let x = tone(32);
        let g = Complex64::new(0.0, 1.0);
        let ch = ChannelRealization { taps: vec![Tap { delay_samples: 5, gain: g }] };
        let y = apply_channel(&x, &ch);
        assert_eq!(y.len(), 37);
        for i in 0..5 {
            assert_eq!(y.samples()[i], Complex64::ZERO);
        }
        for (i, &xi) in x.samples().iter().enumerate() {
            assert!((y.samples()[i + 5] - g * xi).norm() < 1e-15);
        }
    }

    #[test]
    fn two_taps_match_explicit_convolution() {
        let x = tone(50);
        let ch = ChannelRealization {
            taps: vec![
                Tap { delay_samples: 0, gain: Complex64::new(0.8, -0.1) },
                Tap { delay_samples: 7, gain: Complex64::new(-0.3, 0.45) },
            ],
        };
        let y = apply_channel(&x, &ch);
        // impulse-response convolution oracle
        let mut h = [Complex64::ZERO; 8];
        h[0] = Complex64::new(0.8, -0.1);
        h[7] = Complex64::new(-0.3, 0.45);
        for n in 0..y.len() {
            let mut acc = Complex64::ZERO;
            for (d, &hd) in h.iter().enumerate() {
                if n >= d && n - d < x.len() {
                    acc += hd * x.samples()[n - d];
                }
            }
            assert!((y.samples()[n] - acc).norm() < 1e-12, "sample {n}");
        }
    }

    #[test]
    fn apply_channel_is_linear() {
        let x1 = tone(40);
        let x2 = BasebandSignal::new(
            (0..40).map(|i| Complex64::new(0.3 * i as f64, -0.2)).collect(),
            1000.0,
        )
        .unwrap();
        let a = Complex64::new(1.3, -0.4);
        let b = Complex64::new(-0.2, 0.9);
        let ch = ChannelRealization {
            taps: vec![
                Tap { delay_samples: 0, gain: Complex64::new(0.6, 0.2) },
                Tap { delay_samples: 3, gain: Complex64::new(0.1, -0.7) },
            ],
        };
        let combined = BasebandSignal::new(
            x1.samples().iter().zip(x2.samples()).map(|(&u, &v)| a * u + b * v).collect(),
            1000.0,
        )
        .unwrap();
        let lhs = apply_channel(&combined, &ch);
        let y1 = apply_channel(&x1, &ch);
        let y2 = apply_channel(&x2, &ch);
        for i in 0..lhs.len() {
            let rhs = a * y1.samples()[i] + b * y2.samples()[i];
            assert!((lhs.samples()[i] - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn block_fading_realization_is_reusable() {
        let profile = ChannelProfile::default_four_path();
        let mut rng = seeds::stream_rng(17, &[seeds::CHANNEL_SALT]);
        let ch = draw_channel(&profile, 65280.0, &mut rng);
        let x = tone(100);
        assert_eq!(apply_channel(&x, &ch), apply_channel(&x, &ch));
    }

    #[test]
    fn draw_is_deterministic_in_seed() {
        let profile = ChannelProfile::default_four_path();
        let mut a = seeds::stream_rng(21, &[1]);
        let mut b = seeds::stream_rng(21, &[1]);
        assert_eq!(
            draw_channel(&profile, 65280.0, &mut a),
            draw_channel(&profile, 65280.0, &mut b)
        );
    }

    #[test]
    fn rayleigh_second_moment_matches_mean_power() {
        let profile = ChannelProfile::new(vec![0.0], vec![1.0], 0.0).unwrap();
        let mut rng = seeds::stream_rng(33, &[2]);
        let n = 100_000;
        let mean_sq: f64 = (0..n)
            .map(|_| draw_channel(&profile, 1000.0, &mut rng).taps[0].gain.norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean_sq - 1.0).abs() < 0.02, "mean |gain|^2 = {mean_sq}");
    }

    #[test]
    fn rayleigh_magnitude_passes_ks_test() {
        // KS test against the Rayleigh CDF 1 - exp(-r^2/p) at significance
        // 0.01 (asymptotic critical value 1.628/sqrt(n)).
        let profile = ChannelProfile::new(vec![0.0], vec![1.0], 0.0).unwrap();
        let mut rng = seeds::stream_rng(91, &[3]);
        let n = 10_000;
        let mut mags: Vec<f64> = (0..n)
            .map(|_| draw_channel(&profile, 1000.0, &mut rng).taps[0].gain.norm())
            .collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (i, &r) in mags.iter().enumerate() {
            let f = 1.0 - (-r * r).exp();
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((f - lo).abs()).max((hi - f).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} vs critical {critical}");
    }

    #[test]
    fn carrier_phase_follows_exact_delay() {
        let profile =
            ChannelProfile::new(vec![0.0, 1.0e-3], vec![0.5, 0.5], 100e3).unwrap();
        let ch = fixed_realization(&profile, 65280.0);
        // f_c * tau = 100 -> phase = -200*pi = 0 (mod 2*pi)
        let expect = (0.5f64).sqrt();
        assert!((ch.taps[1].gain - Complex64::new(expect, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn awgn_infinite_snr_is_identity() {
        let x = tone(64);
        let mut rng = seeds::stream_rng(1, &[4]);
        let y = add_awgn(&x, f64::INFINITY, 1.0, &mut rng).unwrap();
        assert_eq!(x.samples(), y.samples());
    }

    #[test]
    fn awgn_power_and_component_independence() {
        let x = BasebandSignal::new(vec![Complex64::ZERO; 1_000_000], 1000.0).unwrap();
        let mut rng = seeds::stream_rng(2, &[5]);
        let snr_db = 3.0;
        let y = add_awgn(&x, snr_db, 2.0, &mut rng).unwrap();
        let sigma2 = 2.0 / 10f64.powf(snr_db / 10.0);
        let measured: f64 =
            y.samples().iter().map(|c| c.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((measured - sigma2).abs() / sigma2 < 0.01, "noise power {measured} vs {sigma2}");
        let mean_re: f64 = y.samples().iter().map(|c| c.re).sum::<f64>() / y.len() as f64;
        let mean_im: f64 = y.samples().iter().map(|c| c.im).sum::<f64>() / y.len() as f64;
        let cov: f64 = y
            .samples()
            .iter()
            .map(|c| (c.re - mean_re) * (c.im - mean_im))
            .sum::<f64>()
            / y.len() as f64;
        let corr = cov / (sigma2 / 2.0);
        assert!(corr.abs() < 0.01, "re/im correlation {corr}");
    }

    #[test]
    fn offset_insertion() {
        let x = tone(16);
        let mut rng = seeds::stream_rng(3, &[6]);
        let same = insert_offset(&x, 0, &mut rng, 1.0);
        assert_eq!(same.samples(), x.samples());
        let padded = insert_offset(&x, 100, &mut rng, 0.0);
        assert_eq!(padded.len(), 116);
        for i in 0..100 {
            assert_eq!(padded.samples()[i], Complex64::ZERO);
        }
        assert_eq!(&padded.samples()[100..], x.samples());
    }
}
