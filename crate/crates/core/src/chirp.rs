//! Orthogonal chirp basis and the DOCT/IDOCT transform pair.
//!
//! The m-th basis waveform over one symbol of duration `T` is
//! `psi_m(t) = (1/sqrt(T)) * exp(j(2*pi*m*df*t + pi*mu*t^2))` with `df = 1/T`,
//! so all subcarriers share the quadratic phase `pi*mu*t^2`. Critically
//! sampled at `fs = K*df` (N = K samples per symbol) the discrete basis is
//! `psi_m[n] = (1/sqrt(N)) * exp(j(2*pi*m*n/N + pi*mu*(n/fs)^2))`, which keeps
//! the Kronecker-delta cross-correlation of the continuous design and makes
//! analysis/synthesis a unitary pair.
//!
//! Because the quadratic term is independent of the subcarrier index, the
//! forward transform factors into a pointwise de-chirp followed by a standard
//! DFT; [`doct_fast`]/[`idoct_fast`] use that factorization with an FFT when
//! the size is a power of two. The direct-summation [`doct`]/[`idoct`] are the
//! O(N^2) reference path, kept independent so the two routes can check each
//! other.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{McdmError, Result};

/// Parameters of one chirp symbol: duration, spacing, rate, and sampling.
///
/// `delta_f = 1/T` and `fs = K * delta_f` (so `N = K`) hold by construction.
/// `mu > 0` is an up-chirp, `mu < 0` a down-chirp, `mu = 0` plain OFDM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    t_symbol: f64,
    delta_f: f64,
    mu: f64,
    k: usize,
    n: usize,
    fs: f64,
}

impl ChirpParams {
    /// Build parameters from subcarrier count, spacing, and chirp rate.
    pub fn new(k: usize, delta_f: f64, mu: f64) -> Result<Self> {
        if k < 2 {
            return Err(McdmError::Config(format!("K must be >= 2, got {k}")));
        }
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return Err(McdmError::Config(format!("delta_f must be positive, got {delta_f}")));
        }
        if !mu.is_finite() {
            return Err(McdmError::Config("chirp rate must be finite".into()));
        }
        Ok(Self {
            t_symbol: 1.0 / delta_f,
            delta_f,
            mu,
            k,
            n: k,
            fs: k as f64 * delta_f,
        })
    }

    /// The four stock configurations: K in {128, 256, 512, 1024} paired with
    /// spacings {509, 255, 128, 64} Hz and up-chirp rates {7.15e4, 3.58e4,
    /// 1.79e4, 8.94e3} Hz/s (mu*T ~ 140.7 Hz for all of them).
    pub fn stock(k: usize) -> Result<Self> {
        let (delta_f, mu) = match k {
            128 => (509.0, 7.15e4),
            256 => (255.0, 3.58e4),
            512 => (128.0, 1.79e4),
            1024 => (64.0, 8.94e3),
            _ => {
                return Err(McdmError::Config(format!(
                    "no stock configuration for K={k}; use ChirpParams::new"
                )))
            }
        };
        Self::new(k, delta_f, mu)
    }

    /// The stock subcarrier counts.
    pub const STOCK_K: [usize; 4] = [128, 256, 512, 1024];
    /// The stock chirp rates (Hz/s), ordered as [`Self::STOCK_K`].
    pub const STOCK_MU: [f64; 4] = [7.15e4, 3.58e4, 1.79e4, 8.94e3];

    pub fn t_symbol(&self) -> f64 {
        self.t_symbol
    }
    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Whether the factorized FFT path applies; otherwise the fast transforms
    /// silently fall back to direct summation.
    pub fn has_fast_transform(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Phase of basis vector `k` at sample `n`. The linear term is reduced
    /// with integer arithmetic so orthogonality sums cancel at machine
    /// precision.
    fn basis_phase(&self, k: usize, n: usize) -> f64 {
        let lin = 2.0 * PI * ((k * n) % self.n) as f64 / self.n as f64;
        let t = n as f64 / self.fs;
        lin + PI * self.mu * t * t
    }

    /// The common quadratic chirp phase exp(j*pi*mu*(n/fs)^2).
    fn chirp_factor(&self, n: usize) -> Complex64 {
        let t = n as f64 / self.fs;
        Complex64::from_polar(1.0, PI * self.mu * t * t)
    }
}

/// One symbol's worth of chirp-subcarrier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    coeffs: Vec<Complex64>,
}

impl FrequencyVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(k: usize) -> Self {
        Self { coeffs: vec![Complex64::ZERO; k] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Total energy, sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl From<Vec<Complex64>> for FrequencyVector {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

/// Complex sample stream plus its sample rate; the time-domain currency of
/// the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    samples: Vec<Complex64>,
    fs: f64,
}

impl BasebandSignal {
    pub fn new(samples: Vec<Complex64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(McdmError::Config(format!("sample rate must be positive, got {fs}")));
        }
        Ok(Self { samples, fs })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Total energy, sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Sampled basis waveform `psi_m`, unit energy.
pub fn chirp_waveform(params: &ChirpParams, m: usize) -> Result<BasebandSignal> {
    if m >= params.k {
        return Err(McdmError::IndexOutOfRange { index: m, limit: params.k });
    }
    let scale = 1.0 / (params.n as f64).sqrt();
    let samples = (0..params.n)
        .map(|n| Complex64::from_polar(scale, params.basis_phase(m, n)))
        .collect();
    BasebandSignal::new(samples, params.fs)
}

/// Inner product of sampled `psi_k` with conjugated `psi_l`; the Kronecker
/// delta when `delta_f = 1/T`.
pub fn cross_correlation(params: &ChirpParams, k: usize, l: usize) -> Result<Complex64> {
    let a = chirp_waveform(params, k)?;
    let b = chirp_waveform(params, l)?;
    Ok(a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| x * y.conj())
        .sum())
}

fn check_len(len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(McdmError::DimensionMismatch { expected, got: len });
    }
    Ok(())
}

/// Forward transform by direct summation: `X[k] = <x, psi_k> / sqrt-scaling`,
/// the O(N^2) reference path.
pub fn doct(x: &BasebandSignal, params: &ChirpParams) -> Result<FrequencyVector> {
    check_len(x.len(), params.n)?;
    let scale = 1.0 / (params.n as f64).sqrt();
    let coeffs = (0..params.k)
        .map(|k| {
            x.samples()
                .iter()
                .enumerate()
                .map(|(n, &xn)| xn * Complex64::from_polar(scale, -params.basis_phase(k, n)))
                .sum()
        })
        .collect();
    Ok(FrequencyVector::new(coeffs))
}

/// Inverse transform by direct summation; exact inverse of [`doct`].
pub fn idoct(x: &FrequencyVector, params: &ChirpParams) -> Result<BasebandSignal> {
    check_len(x.len(), params.k)?;
    let scale = 1.0 / (params.n as f64).sqrt();
    let samples = (0..params.n)
        .map(|n| {
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(k, &xk)| xk * Complex64::from_polar(scale, params.basis_phase(k, n)))
                .sum()
        })
        .collect();
    BasebandSignal::new(samples, params.fs)
}

/// Factorized forward transform: pointwise de-chirp then FFT. Falls back to
/// [`doct`] when N is not a power of two (see
/// [`ChirpParams::has_fast_transform`]).
pub fn doct_fast(x: &BasebandSignal, params: &ChirpParams) -> Result<FrequencyVector> {
    check_len(x.len(), params.n)?;
    if !params.has_fast_transform() {
        return doct(x, params);
    }
    let mut buf: Vec<Complex64> = x
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &xn)| xn * params.chirp_factor(n).conj())
        .collect();
    FftPlanner::new().plan_fft_forward(params.n).process(&mut buf);
    let scale = 1.0 / (params.n as f64).sqrt();
    for c in &mut buf {
        *c *= scale;
    }
    Ok(FrequencyVector::new(buf))
}

/// Factorized inverse transform: inverse FFT then pointwise chirp. Falls back
/// to [`idoct`] when N is not a power of two.
pub fn idoct_fast(x: &FrequencyVector, params: &ChirpParams) -> Result<BasebandSignal> {
    check_len(x.len(), params.k)?;
    if !params.has_fast_transform() {
        return idoct(x, params);
    }
    let mut buf = x.as_slice().to_vec();
    FftPlanner::new().plan_fft_inverse(params.n).process(&mut buf);
    let scale = 1.0 / (params.n as f64).sqrt();
    for (n, c) in buf.iter_mut().enumerate() {
        *c *= params.chirp_factor(n) * scale;
    }
    BasebandSignal::new(buf, params.fs)
}

/// Continuous orthogonal chirp transform of a densely sampled signal at one
/// analysis frequency, by composite trapezoid rule. Validation oracle only;
/// `x` should cover [0, T] at >= 8x the symbol rate (errors below 2x).
pub fn oct_quadrature(x: &BasebandSignal, f: f64, params: &ChirpParams) -> Result<Complex64> {
    if x.fs() < 2.0 * params.fs() {
        return Err(McdmError::Precision(format!(
            "oversampled rate {} below 2x symbol rate {}",
            x.fs(),
            params.fs()
        )));
    }
    if x.len() < 2 {
        return Err(McdmError::Precision("need at least two samples to integrate".into()));
    }
    let dt = 1.0 / x.fs();
    let norm = 1.0 / params.t_symbol().sqrt();
    let mut acc = Complex64::ZERO;
    let last = x.len() - 1;
    for (i, &xi) in x.samples().iter().enumerate() {
        let t = i as f64 * dt;
        let kernel = Complex64::from_polar(1.0, -(2.0 * PI * f * t + PI * params.mu() * t * t));
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        acc += xi * kernel * w;
    }
    Ok(acc * dt * norm)
}
