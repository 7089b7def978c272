//! Closed-form BER reference curves and dB-gain readout helpers.

use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

use crate::error::{McdmError, Result};

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Reference curve families. SNR arguments are linear per-bit SNR for the
/// AWGN kinds and average per-bit SNR for the Rayleigh kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    AwgnBpsk,
    AwgnQpsk,
    RayleighBpsk,
}

impl OracleKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn_bpsk" => Ok(Self::AwgnBpsk),
            "awgn_qpsk" => Ok(Self::AwgnQpsk),
            "rayleigh_bpsk" => Ok(Self::RayleighBpsk),
            other => Err(McdmError::Config(format!(
                "unknown oracle kind `{other}` (expected awgn_bpsk, awgn_qpsk, rayleigh_bpsk)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AwgnBpsk => "awgn_bpsk",
            Self::AwgnQpsk => "awgn_qpsk",
            Self::RayleighBpsk => "rayleigh_bpsk",
        }
    }
}

/// Closed-form BER at one SNR point (dB in, probability out).
pub fn oracle_ber(kind: OracleKind, snr_db: f64) -> f64 {
    let g = 10f64.powf(snr_db / 10.0);
    match kind {
        // Per-bit BER; gray-coded QPSK matches BPSK as a function of
        // per-bit SNR.
        OracleKind::AwgnBpsk | OracleKind::AwgnQpsk => q_function((2.0 * g).sqrt()),
        OracleKind::RayleighBpsk => 0.5 * (1.0 - (g / (1.0 + g)).sqrt()),
    }
}

/// A reference curve over an SNR grid.
#[derive(Debug, Clone)]
pub struct OracleCurve {
    pub kind: OracleKind,
    /// (snr_db, ber) points.
    pub points: Vec<(f64, f64)>,
}

pub fn oracle_curve(kind: OracleKind, snr_grid: &[f64]) -> OracleCurve {
    OracleCurve {
        kind,
        points: snr_grid.iter().map(|&s| (s, oracle_ber(kind, s))).collect(),
    }
}

/// Horizontal gain of curve `b` over curve `a` at a fixed BER level: the
/// difference of the SNRs where each curve crosses the level, found by
/// log-linear interpolation between grid points. `None` when either curve
/// never crosses the level.
pub fn db_gain_at_ber(a: &[(f64, f64)], b: &[(f64, f64)], level: f64) -> Option<f64> {
    let snr_at = |curve: &[(f64, f64)]| -> Option<f64> {
        let lg = level.log10();
        for w in curve.windows(2) {
            let (s0, b0) = w[0];
            let (s1, b1) = w[1];
            if b0 <= 0.0 || b1 <= 0.0 {
                continue;
            }
            let (l0, l1) = (b0.log10(), b1.log10());
            if (l0 - lg) * (l1 - lg) <= 0.0 && l0 != l1 {
                return Some(s0 + (s1 - s0) * (lg - l0) / (l1 - l0));
            }
        }
        None
    };
    Some(snr_at(a)? - snr_at(b)?)
}
