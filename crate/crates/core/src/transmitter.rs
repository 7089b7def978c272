//! Transmit chain: bits to constellation symbols, subcarrier allocation,
//! pilot insertion, IDOCT synthesis, and packet framing.
//!
//! A packet is `[preamble | pause | sqrt(E) * idoct(s) | zero pad]`. The
//! preamble is a pseudo-random antipodal chip sequence used for
//! synchronization; the trailing zero pad absorbs multipath delay spread in
//! place of a cyclic prefix.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::chirp::{idoct_fast, BasebandSignal, ChirpParams, FrequencyVector};
use crate::error::{McdmError, Result};
use crate::seeds;

/// Constellation choice. Both are unit symbol energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    /// Constellation points indexed by the bit pattern read as a binary
    /// number (first bit = MSB). Gray-coded: nearest neighbours differ in
    /// exactly one bit.
    pub fn constellation(&self) -> &'static [Complex64] {
        const BPSK: [Complex64; 2] =
            [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        // (b0, b1): real = (1 - 2*b1)/sqrt(2), imag = (1 - 2*b0)/sqrt(2)
        const QPSK: [Complex64; 4] = [
            Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),   // 00
            Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),  // 01
            Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),  // 10
            Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2), // 11
        ];
        match self {
            Modulation::Bpsk => &BPSK,
            Modulation::Qpsk => &QPSK,
        }
    }

    /// Bits for constellation index, MSB first.
    pub fn index_bits(&self, idx: usize) -> Vec<bool> {
        let bps = self.bits_per_symbol();
        (0..bps).map(|i| (idx >> (bps - 1 - i)) & 1 == 1).collect()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
        }
    }
}

/// How data subcarriers are split among users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessScheme {
    /// Contiguous runs of subcarriers per user.
    Block,
    /// Round-robin interleaved subcarriers.
    Comb,
}

impl AccessScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            AccessScheme::Block => "block",
            AccessScheme::Comb => "comb",
        }
    }
}

/// Full transmit-side parameterization of one link configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub chirp: ChirpParams,
    pub modulation: Modulation,
    /// Number of pilot subcarriers K_p; must divide K.
    pub pilot_count: usize,
    /// Number of users N_UR.
    pub n_users: usize,
    pub access: AccessScheme,
    /// Preamble length in chips (one chip per sample).
    pub preamble_len: usize,
    /// Pause between preamble and symbol, seconds.
    pub t_pause: f64,
    /// Trailing zero padding, seconds.
    pub t_zp: f64,
    /// Seed for the preamble and derived pilot/dummy streams.
    pub seed: u64,
}

/// Default preamble length: 86 chips (1.31 ms at the stock sample rates).
pub const DEFAULT_PREAMBLE_LEN: usize = 86;
/// Default pause between preamble and symbol, seconds.
pub const DEFAULT_T_PAUSE: f64 = 1.54e-3;
/// Default trailing zero padding, seconds.
pub const DEFAULT_T_ZP: f64 = 2.56e-3;
/// Default frame seed.
pub const DEFAULT_SEED: u64 = 0x4d43_444d; // "MCDM"

impl FrameConfig {
    /// A configuration with the stock chirp parameters for `k` and the
    /// default framing durations.
    pub fn stock(k: usize, pilot_count: usize) -> Result<Self> {
        let cfg = Self {
            chirp: ChirpParams::stock(k)?,
            modulation: Modulation::Bpsk,
            pilot_count,
            n_users: 1,
            access: AccessScheme::Block,
            preamble_len: DEFAULT_PREAMBLE_LEN,
            t_pause: DEFAULT_T_PAUSE,
            t_zp: DEFAULT_T_ZP,
            seed: DEFAULT_SEED,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.chirp.k();
        if self.pilot_count == 0 || !k.is_multiple_of(self.pilot_count) {
            return Err(McdmError::Config(format!(
                "pilot count {} must divide K={k}",
                self.pilot_count
            )));
        }
        if self.pilot_count > k {
            return Err(McdmError::Config("more pilots than subcarriers".into()));
        }
        let data = k - self.pilot_count;
        if self.n_users == 0 {
            return Err(McdmError::Config("need at least one user".into()));
        }
        if self.n_users > data {
            return Err(McdmError::Capacity(format!(
                "{} users exceed {data} data subcarriers",
                self.n_users
            )));
        }
        if self.preamble_len == 0 {
            return Err(McdmError::Config("preamble must have at least one chip".into()));
        }
        if !(self.t_pause >= 0.0 && self.t_pause.is_finite()) {
            return Err(McdmError::Config("pause duration must be >= 0".into()));
        }
        if !(self.t_zp >= 0.0 && self.t_zp.is_finite()) {
            return Err(McdmError::Config("zero-pad duration must be >= 0".into()));
        }
        Ok(())
    }

    /// Pilot spacing L = K / K_p.
    pub fn pilot_spacing(&self) -> usize {
        self.chirp.k() / self.pilot_count
    }

    /// Number of non-pilot subcarriers.
    pub fn data_subcarrier_count(&self) -> usize {
        self.chirp.k() - self.pilot_count
    }

    /// Subcarriers actually carrying user data (excludes the null-user
    /// remainder when N_UR does not divide evenly).
    pub fn per_user_subcarriers(&self) -> usize {
        self.data_subcarrier_count() / self.n_users
    }

    /// Payload bits carried per packet across all users.
    pub fn payload_bits(&self) -> usize {
        self.per_user_subcarriers() * self.n_users * self.modulation.bits_per_symbol()
    }

    /// Canonical seed for the pilot symbol stream.
    pub fn pilot_seed(&self) -> u64 {
        seeds::mix(self.seed, seeds::PILOT_SALT)
    }

    /// Sample layout of the packet this configuration produces.
    pub fn layout(&self) -> PacketLayout {
        let fs = self.chirp.fs();
        let pause = (self.t_pause * fs).round() as usize;
        let zp = (self.t_zp * fs).round() as usize;
        let pre = self.preamble_len;
        let n = self.chirp.n();
        PacketLayout {
            preamble: Segment { offset: 0, len: pre },
            pause: Segment { offset: pre, len: pause },
            symbol: Segment { offset: pre + pause, len: n },
            zero_pad: Segment { offset: pre + pause + n, len: zp },
        }
    }
}

/// A contiguous span of samples inside a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub offset: usize,
    pub len: usize,
}

/// Sample offsets of the four packet sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketLayout {
    pub preamble: Segment,
    pub pause: Segment,
    pub symbol: Segment,
    pub zero_pad: Segment,
}

impl PacketLayout {
    pub fn total_len(&self) -> usize {
        self.zero_pad.offset + self.zero_pad.len
    }
}

/// Which user (or system role) owns each subcarrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAllocation {
    /// Pilot subcarrier indices {0, L, 2L, ...}.
    pub pilot_indices: Vec<usize>,
    /// Data subcarriers per user; entry `i` belongs to user `i + 1`.
    pub users: Vec<Vec<usize>>,
    /// Remainder subcarriers carrying known dummy symbols, excluded from BER.
    pub null_user: Vec<usize>,
}

impl UserAllocation {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// All non-pilot indices in ascending order.
    pub fn non_pilot_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.users.iter().flatten().chain(self.null_user.iter()).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Split indices into `n_users` contiguous runs of equal length; the trailing
/// remainder is returned separately.
pub fn block_split(indices: &[usize], n_users: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let per = indices.len() / n_users;
    let users = (0..n_users).map(|u| indices[u * per..(u + 1) * per].to_vec()).collect();
    (users, indices[per * n_users..].to_vec())
}

/// Deal indices round-robin (index position i goes to user i mod n_users);
/// the trailing remainder is returned separately.
pub fn comb_split(indices: &[usize], n_users: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let per = indices.len() / n_users;
    let dealt = per * n_users;
    let mut users = vec![Vec::with_capacity(per); n_users];
    for (i, &idx) in indices[..dealt].iter().enumerate() {
        users[i % n_users].push(idx);
    }
    (users, indices[dealt..].to_vec())
}

/// Assign pilots at every L-th subcarrier and divide the rest among users
/// according to the access scheme. Deterministic.
pub fn allocate_subcarriers(config: &FrameConfig) -> Result<UserAllocation> {
    config.validate()?;
    let k = config.chirp.k();
    let l = config.pilot_spacing();
    let pilot_indices: Vec<usize> = (0..config.pilot_count).map(|m| m * l).collect();
    let data: Vec<usize> = (0..k).filter(|i| i % l != 0).collect();
    let (users, null_user) = match config.access {
        AccessScheme::Block => block_split(&data, config.n_users),
        AccessScheme::Comb => comb_split(&data, config.n_users),
    };
    Ok(UserAllocation { pilot_indices, users, null_user })
}

/// Pseudo-random antipodal preamble, one chip per sample.
pub fn gen_preamble(n_pn: usize, seed: u64, fs: f64) -> BasebandSignal {
    let mut rng = seeds::stream_rng(seed, &[]);
    let chips = (0..n_pn)
        .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect();
    BasebandSignal::new(chips, fs).expect("fs validated by caller")
}

/// Known unit-energy BPSK pilot symbols, deterministic in the seed.
pub fn pilot_symbols(k_p: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = seeds::stream_rng(seed, &[]);
    (0..k_p)
        .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

/// Compose the frequency-domain symbol with explicit pilot symbols. Every
/// subcarrier is assigned exactly once: pilots, user data, then known dummy
/// BPSK on the null-user remainder.
pub fn assemble_with_pilots(
    config: &FrameConfig,
    allocation: &UserAllocation,
    user_bits: &[Vec<bool>],
    pilots: &[Complex64],
) -> Result<FrequencyVector> {
    let k = config.chirp.k();
    if pilots.len() != allocation.pilot_indices.len() {
        return Err(McdmError::DimensionMismatch {
            expected: allocation.pilot_indices.len(),
            got: pilots.len(),
        });
    }
    if user_bits.len() != allocation.user_count() {
        return Err(McdmError::Framing(format!(
            "expected bit arrays for {} users, got {}",
            allocation.user_count(),
            user_bits.len()
        )));
    }
    let bps = config.modulation.bits_per_symbol();
    let mut coeffs = vec![Complex64::ZERO; k];
    for (&idx, &p) in allocation.pilot_indices.iter().zip(pilots) {
        coeffs[idx] = p;
    }
    for (u, (subs, bits)) in allocation.users.iter().zip(user_bits).enumerate() {
        if bits.len() != subs.len() * bps {
            return Err(McdmError::Framing(format!(
                "user {}: {} bits for {} subcarriers ({} bits/symbol)",
                u + 1,
                bits.len(),
                subs.len(),
                bps
            )));
        }
        let symbols = gray_map(bits, config.modulation)?;
        for (&idx, &s) in subs.iter().zip(&symbols) {
            coeffs[idx] = s;
        }
    }
    let dummy_seed = seeds::mix(config.pilot_seed(), seeds::NULL_SALT);
    for (&idx, d) in allocation
        .null_user
        .iter()
        .zip(pilot_symbols(allocation.null_user.len(), dummy_seed))
    {
        coeffs[idx] = d;
    }
    Ok(FrequencyVector::new(coeffs))
}

/// Compose the frequency-domain symbol; pilots are drawn from `pilot_seed`.
pub fn assemble_frequency_vector(
    config: &FrameConfig,
    allocation: &UserAllocation,
    user_bits: &[Vec<bool>],
    pilot_seed: u64,
) -> Result<FrequencyVector> {
    let pilots = pilot_symbols(allocation.pilot_indices.len(), pilot_seed);
    assemble_with_pilots(config, allocation, user_bits, &pilots)
}

/// Map bits to unit-energy constellation symbols.
///
/// BPSK: 0 -> +1, 1 -> -1. QPSK (gray, bits taken in pairs (b0, b1)):
/// 00 -> (+1+j)/sqrt(2), 01 -> (-1+j)/sqrt(2), 11 -> (-1-j)/sqrt(2),
/// 10 -> (+1-j)/sqrt(2).
pub fn gray_map(bits: &[bool], modulation: Modulation) -> Result<Vec<Complex64>> {
    let bps = modulation.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(McdmError::Framing(format!(
            "{} bits not divisible by {} bits/symbol",
            bits.len(),
            bps
        )));
    }
    let points = modulation.constellation();
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| {
            let idx = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
            points[idx]
        })
        .collect())
}

/// A fully framed transmission plus the ground truth needed for scoring.
#[derive(Debug, Clone)]
pub struct Packet {
    pub signal: BasebandSignal,
    pub layout: PacketLayout,
    /// Transmitted payload bits; entry `i` belongs to user `i + 1`.
    pub tx_bits_per_user: Vec<Vec<bool>>,
    pub tx_frequency_vector: FrequencyVector,
}

/// Frame the packet: preamble, pause, scaled symbol, zero pad.
pub fn build_packet(
    config: &FrameConfig,
    s: &FrequencyVector,
    tx_bits_per_user: Vec<Vec<bool>>,
    energy: f64,
) -> Result<Packet> {
    config.validate()?;
    if !(energy.is_finite() && energy > 0.0) {
        return Err(McdmError::Config(format!("symbol energy must be positive, got {energy}")));
    }
    let layout = config.layout();
    let fs = config.chirp.fs();
    let preamble = gen_preamble(config.preamble_len, config.seed, fs);
    let symbol = idoct_fast(s, &config.chirp)?;
    let amp = energy.sqrt();

    let mut samples = Vec::with_capacity(layout.total_len());
    samples.extend_from_slice(preamble.samples());
    samples.resize(layout.symbol.offset, Complex64::ZERO);
    samples.extend(symbol.samples().iter().map(|&x| x * amp));
    samples.resize(layout.total_len(), Complex64::ZERO);

    Ok(Packet {
        signal: BasebandSignal::new(samples, fs)?,
        layout,
        tx_bits_per_user,
        tx_frequency_vector: s.clone(),
    })
}
