//! Coherent receiver: preamble correlation synchronization, DOCT
//! demodulation with overlap-add of the zero-pad tail, ML pilot channel
//! estimation, linear interpolation to all subcarriers, ML symbol detection,
//! hard slicing, gray demapping, and per-user demultiplexing.
//!
//! The zero-pad guard turns the linear multipath convolution into a circular
//! one once the received tail is folded back onto the symbol head, so a
//! per-subcarrier (diagonal) channel model applies at the transform output.
//! The fold length is configurable; flat channels should use 0 so no guard
//! noise is folded in.

use num_complex::Complex64;

use crate::chirp::{doct_fast, BasebandSignal, FrequencyVector};
use crate::error::{McdmError, Result};
use crate::transmitter::{pilot_symbols, FrameConfig, Modulation, PacketLayout, UserAllocation};

/// Outcome of the preamble correlation search.
#[derive(Debug, Clone)]
pub struct SyncResult {
    /// Estimated packet start sample.
    pub t_hat: usize,
    /// Metric value at the peak.
    pub metric_peak: f64,
    /// Squared-magnitude correlation over the whole search window.
    pub metric_trace: Vec<f64>,
}

/// Correlate the known preamble against the received stream over
/// `tau in [0, window)` and take the argmax of the squared magnitude.
/// Ties break to the smallest offset.
pub fn synchronize(
    rx: &BasebandSignal,
    preamble: &BasebandSignal,
    window: usize,
) -> Result<SyncResult> {
    if window == 0 || window + preamble.len() > rx.len() {
        return Err(McdmError::SyncSearch(format!(
            "window {window} plus preamble {} exceeds received length {}",
            preamble.len(),
            rx.len()
        )));
    }
    let mut trace = Vec::with_capacity(window);
    let p = preamble.samples();
    let r = rx.samples();
    for tau in 0..window {
        let acc: Complex64 = p.iter().zip(&r[tau..tau + p.len()]).map(|(&a, &b)| a * b.conj()).sum();
        trace.push(acc.norm_sqr());
    }
    let mut t_hat = 0usize;
    let mut peak = trace[0];
    for (tau, &m) in trace.iter().enumerate().skip(1) {
        if m > peak {
            peak = m;
            t_hat = tau;
        }
    }
    Ok(SyncResult { t_hat, metric_peak: peak, metric_trace: trace })
}

/// Extract the symbol segment at `t_hat` plus the layout offset, fold up to
/// `fold_len` guard samples back onto the head (overlap-add), and transform.
pub fn demodulate(
    rx: &BasebandSignal,
    layout: &PacketLayout,
    t_hat: usize,
    chirp: &crate::chirp::ChirpParams,
    fold_len: usize,
) -> Result<FrequencyVector> {
    let n = layout.symbol.len;
    let start = t_hat + layout.symbol.offset;
    if start + n > rx.len() {
        return Err(McdmError::Alignment(format!(
            "symbol segment [{start}, {}) beyond received length {}",
            start + n,
            rx.len()
        )));
    }
    let mut seg = rx.samples()[start..start + n].to_vec();
    let fold = fold_len.min(layout.zero_pad.len).min(rx.len().saturating_sub(start + n));
    for j in 0..fold {
        seg[j % n] += rx.samples()[start + n + j];
    }
    doct_fast(&BasebandSignal::new(seg, rx.fs())?, chirp)
}

/// ML (least-squares) channel estimate at the pilot subcarriers. With a
/// diagonal pilot matrix this is elementwise `y_p * conj(s_p) / |s_p|^2`.
pub fn estimate_pilot_channel(y_p: &[Complex64], s_p: &[Complex64]) -> Result<Vec<Complex64>> {
    if y_p.len() != s_p.len() {
        return Err(McdmError::DimensionMismatch { expected: s_p.len(), got: y_p.len() });
    }
    s_p.iter()
        .zip(y_p)
        .enumerate()
        .map(|(m, (&s, &y))| {
            let den = s.norm_sqr();
            if den == 0.0 {
                return Err(McdmError::SingularPilot(m));
            }
            Ok(y * s.conj() / den)
        })
        .collect()
}

/// Linear interpolation of pilot estimates to all `k` subcarriers:
/// `h[k] = (1 - l/L) h_p[m] + (l/L) h_p[m+1]` with `m = k / L`, `l = k mod L`.
/// Beyond the last pilot the last estimate is held.
pub fn interpolate_channel(h_pilot: &[Complex64], k: usize, l: usize) -> Result<Vec<Complex64>> {
    if l == 0 || h_pilot.is_empty() || h_pilot.len() * l != k {
        return Err(McdmError::DimensionMismatch { expected: k, got: h_pilot.len() * l });
    }
    let kp = h_pilot.len();
    let mut h = Vec::with_capacity(k);
    for idx in 0..k {
        let m = idx / l;
        let frac = (idx % l) as f64 / l as f64;
        let value = if m + 1 >= kp {
            h_pilot[kp - 1]
        } else {
            h_pilot[m] * (1.0 - frac) + h_pilot[m + 1] * frac
        };
        h.push(value);
    }
    Ok(h)
}

/// Pilot-domain and interpolated full-band channel estimates.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub h_pilot: Vec<Complex64>,
    pub h_full: Vec<Complex64>,
}

/// Detection output: equalized soft symbols, hard decisions, and demultiplexed
/// per-user bits with erasure flags.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Equalized soft symbols on all K subcarriers.
    pub s_soft: FrequencyVector,
    /// Hard decisions on the non-pilot subcarriers, ascending index order.
    pub s_hard: Vec<Complex64>,
    /// Detected bits; entry `i` belongs to user `i + 1`. Pilot and null-user
    /// subcarriers are excluded.
    pub bits_per_user: Vec<Vec<bool>>,
    /// Erasure flags aligned with `bits_per_user`; an erased bit comes from a
    /// subcarrier whose channel coefficient was exactly zero and counts as an
    /// error in BER accounting.
    pub erasures_per_user: Vec<Vec<bool>>,
}

/// Nearest constellation point by Euclidean distance; ties break to the
/// smallest constellation index.
pub fn hard_decision(z: Complex64, modulation: Modulation) -> (usize, Complex64) {
    let pts = modulation.constellation();
    let mut best = 0usize;
    let mut best_d = (z - pts[0]).norm_sqr();
    for (i, &p) in pts.iter().enumerate().skip(1) {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, pts[best])
}

/// Per-subcarrier ML detection for a diagonal channel: equalize
/// `s_soft[k] = y[k] * conj(h[k]) / (|h[k]|^2 * sqrt(E))`, slice to the
/// nearest constellation point, gray-demap, and demultiplex per user.
pub fn detect(
    y: &FrequencyVector,
    h_full: &[Complex64],
    modulation: Modulation,
    allocation: &UserAllocation,
    energy: f64,
) -> Result<DetectionResult> {
    let k = y.len();
    if h_full.len() != k {
        return Err(McdmError::DimensionMismatch { expected: k, got: h_full.len() });
    }
    let amp = energy.sqrt();
    let soft: Vec<Complex64> = y
        .as_slice()
        .iter()
        .zip(h_full)
        .map(|(&yk, &hk)| {
            let den = hk.norm_sqr();
            if den == 0.0 {
                Complex64::ZERO
            } else {
                yk * hk.conj() / (den * amp)
            }
        })
        .collect();

    let non_pilot = allocation.non_pilot_indices();
    let mut s_hard = Vec::with_capacity(non_pilot.len());
    for &idx in &non_pilot {
        s_hard.push(hard_decision(soft[idx], modulation).1);
    }

    let mut bits_per_user = Vec::with_capacity(allocation.user_count());
    let mut erasures_per_user = Vec::with_capacity(allocation.user_count());
    for subs in &allocation.users {
        let mut bits = Vec::with_capacity(subs.len() * modulation.bits_per_symbol());
        let mut erasures = Vec::with_capacity(bits.capacity());
        for &idx in subs {
            let erased = h_full[idx].norm_sqr() == 0.0;
            let (sym_idx, _) = hard_decision(soft[idx], modulation);
            for b in modulation.index_bits(sym_idx) {
                bits.push(b);
                erasures.push(erased);
            }
        }
        bits_per_user.push(bits);
        erasures_per_user.push(erasures);
    }

    Ok(DetectionResult {
        s_soft: FrequencyVector::new(soft),
        s_hard,
        bits_per_user,
        erasures_per_user,
    })
}

/// Channel-state source for packet reception.
#[derive(Debug, Clone, Copy)]
pub enum CsiMode<'a> {
    /// Pilot-based estimation; pilots regenerated from the seed.
    Estimated { pilot_seed: u64 },
    /// Ground-truth coefficients and packet start (timing genie), used to
    /// isolate detection from estimation and synchronization.
    Perfect { h_full: &'a [Complex64], true_start: usize },
}

/// Receiver-side knobs for one packet.
#[derive(Debug, Clone, Copy)]
pub struct RxParams<'a> {
    /// Symbol energy E (known at the receiver).
    pub energy: f64,
    /// Correlation search window; `None` means the largest window that fits.
    pub sync_window: Option<usize>,
    /// Declare the packet lost when the peak is below this multiple of the
    /// mean metric.
    pub sync_threshold: f64,
    /// Overlap-add fold length in samples (bounded by the zero-pad length).
    pub fold_len: usize,
    pub csi: CsiMode<'a>,
}

impl<'a> RxParams<'a> {
    pub fn estimated(pilot_seed: u64, fold_len: usize) -> Self {
        Self {
            energy: 1.0,
            sync_window: None,
            sync_threshold: 5.0,
            fold_len,
            csi: CsiMode::Estimated { pilot_seed },
        }
    }

    pub fn perfect(h_full: &'a [Complex64], true_start: usize, fold_len: usize) -> Self {
        Self {
            energy: 1.0,
            sync_window: None,
            sync_threshold: 5.0,
            fold_len,
            csi: CsiMode::Perfect { h_full, true_start },
        }
    }
}

/// Successful reception report.
#[derive(Debug, Clone)]
pub struct RxReport {
    pub t_hat: usize,
    pub sync: Option<SyncResult>,
    pub estimate: Option<ChannelEstimate>,
    pub detection: DetectionResult,
}

/// Reception either produces a report or declares the packet lost at the
/// synchronization stage.
#[derive(Debug, Clone)]
pub enum RxOutcome {
    Detected(Box<RxReport>),
    Lost { sync: SyncResult },
}

/// Full receive chain: synchronize, demodulate, estimate, interpolate,
/// detect.
pub fn receive_packet(
    rx: &BasebandSignal,
    config: &FrameConfig,
    allocation: &UserAllocation,
    preamble: &BasebandSignal,
    params: &RxParams,
) -> Result<RxOutcome> {
    let layout = config.layout();
    let (t_hat, sync) = match params.csi {
        CsiMode::Perfect { true_start, .. } => (true_start, None),
        CsiMode::Estimated { .. } => {
            let window = params
                .sync_window
                .unwrap_or_else(|| rx.len().saturating_sub(preamble.len()).max(1));
            let sync = synchronize(rx, preamble, window)?;
            let mean = sync.metric_trace.iter().sum::<f64>() / sync.metric_trace.len() as f64;
            if sync.metric_peak < params.sync_threshold * mean {
                return Ok(RxOutcome::Lost { sync });
            }
            (sync.t_hat, Some(sync))
        }
    };

    let y = demodulate(rx, &layout, t_hat, &config.chirp, params.fold_len)?;

    let estimate = match params.csi {
        CsiMode::Perfect { h_full, .. } => {
            if h_full.len() != config.chirp.k() {
                return Err(McdmError::DimensionMismatch {
                    expected: config.chirp.k(),
                    got: h_full.len(),
                });
            }
            None
        }
        CsiMode::Estimated { pilot_seed } => {
            let pilots = pilot_symbols(allocation.pilot_indices.len(), pilot_seed);
            let y_p: Vec<Complex64> =
                allocation.pilot_indices.iter().map(|&i| y.as_slice()[i]).collect();
            // Pilot symbols are unit-energy; the estimator sees y_p scaled by
            // sqrt(E), so normalize it out before interpolation.
            let amp = params.energy.sqrt();
            let h_pilot: Vec<Complex64> = estimate_pilot_channel(&y_p, &pilots)?
                .into_iter()
                .map(|h| h / amp)
                .collect();
            let h_full =
                interpolate_channel(&h_pilot, config.chirp.k(), config.pilot_spacing())?;
            Some(ChannelEstimate { h_pilot, h_full })
        }
    };
    let h_full: &[Complex64] = match (&params.csi, &estimate) {
        (CsiMode::Perfect { h_full, .. }, _) => h_full,
        (_, Some(e)) => &e.h_full,
        _ => unreachable!("estimated mode always produces an estimate"),
    };

    let detection = detect(&y, h_full, config.modulation, allocation, params.energy)?;
    Ok(RxOutcome::Detected(Box::new(RxReport { t_hat, sync, estimate, detection })))
}
