//! Monte Carlo experiment engine: seeded trial execution across
//! (configuration, SNR) grids, per-user BER accounting, adaptive-run
//! orchestration, and plot-ready CSV output.
//!
//! Determinism contract: every random quantity in a trial comes from a stream
//! keyed by (master seed, configuration id, SNR index, trial index), so a
//! sweep rerun with the same master seed produces byte-identical output
//! regardless of worker count.
//!
//! SNR convention: `snr_db` is the ratio of ensemble-average received power
//! over the symbol span (symbol energy times total mean path power, i.e. E
//! for a normalized profile) to per-sample complex noise variance. Noise is
//! added to the entire packet.

pub mod config;
pub mod csv;
pub mod oracle;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::adaptation::{default_schedule, select_config, AdaptationDecision, ProbeResult};
use crate::channel::{
    apply_channel, draw_channel, draw_gains, fixed_realization, realize_with_gains, add_awgn,
    ChannelProfile, ChannelRealization,
};
use crate::chirp::{BasebandSignal, ChirpParams};
use crate::error::{McdmError, Result};
use crate::receiver::{receive_packet, RxOutcome, RxParams};
use crate::seeds;
use crate::transmitter::{
    allocate_subcarriers, assemble_frequency_vector, build_packet, gen_preamble, AccessScheme,
    FrameConfig, Modulation, UserAllocation,
};

/// What the harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// BER over the full (configuration, SNR) grid.
    Sweep,
    /// Probe schedule, selection, feedback at one SNR.
    Adapt,
    /// Identity channel, no noise; every bit must survive.
    Loopback,
}

/// Channel-state knowledge given to the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiSetting {
    Estimated,
    Perfect,
}

/// How tap gains vary across packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Independent Rayleigh draw per packet (block fading).
    Rayleigh,
    /// Deterministic mean-power gains.
    Fixed,
    /// Single unit tap at zero delay; the profile is ignored.
    Identity,
}

/// Pilot budget as a fraction of K, e.g. 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PilotPortion {
    pub num: usize,
    pub den: usize,
}

impl PilotPortion {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        let bad = || McdmError::Config(format!("pilot portion `{s}` is not of the form `num/den`"));
        if parts.len() != 2 {
            return Err(bad());
        }
        let num: usize = parts[0].trim().parse().map_err(|_| bad())?;
        let den: usize = parts[1].trim().parse().map_err(|_| bad())?;
        if num == 0 || den == 0 {
            return Err(bad());
        }
        Ok(Self { num, den })
    }

    pub fn pilot_count(&self, k: usize) -> Result<usize> {
        if !(k * self.num).is_multiple_of(self.den) {
            return Err(McdmError::Config(format!(
                "pilot portion {}/{} does not divide K={k} evenly",
                self.num, self.den
            )));
        }
        Ok(k * self.num / self.den)
    }
}

impl std::fmt::Display for PilotPortion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Lists per adaptive knob; the grid is their cartesian product.
#[derive(Debug, Clone)]
pub struct FrameGrid {
    pub k: Vec<usize>,
    pub pilot_portion: Vec<PilotPortion>,
    pub modulation: Vec<Modulation>,
    pub access: Vec<AccessScheme>,
    pub n_users: Vec<usize>,
    pub preamble_len: usize,
    pub t_pause: f64,
    pub t_zp: f64,
    pub energy: f64,
    pub frame_seed: u64,
}

/// Channel profile plus the fading policy applied per packet.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub profile: ChannelProfile,
    pub fading: Fading,
}

/// A full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub frame: FrameGrid,
    pub channel: ChannelSpec,
    pub snr_grid: Vec<f64>,
    pub n_packets: usize,
    pub master_seed: u64,
    pub mode: Mode,
    pub csi: CsiSetting,
}

/// Default master seed for reproduction runs.
pub const DEFAULT_MASTER_SEED: u64 = 20_260_810;

impl ExperimentSpec {
    /// Stock experiment: the four subcarrier counts at pilot portion 1/4,
    /// BPSK, block access, single user, SNR 0..14 dB, 1000 packets/point,
    /// Rayleigh fading on the default four-path profile.
    pub fn stock() -> Self {
        Self {
            frame: FrameGrid {
                k: vec![128, 256, 512, 1024],
                pilot_portion: vec![PilotPortion { num: 1, den: 4 }],
                modulation: vec![Modulation::Bpsk],
                access: vec![AccessScheme::Block],
                n_users: vec![1],
                preamble_len: crate::transmitter::DEFAULT_PREAMBLE_LEN,
                t_pause: crate::transmitter::DEFAULT_T_PAUSE,
                t_zp: crate::transmitter::DEFAULT_T_ZP,
                energy: 1.0,
                frame_seed: crate::transmitter::DEFAULT_SEED,
            },
            channel: ChannelSpec {
                profile: ChannelProfile::default_four_path(),
                fading: Fading::Rayleigh,
            },
            snr_grid: (0..=14).step_by(2).map(f64::from).collect(),
            n_packets: 1000,
            master_seed: DEFAULT_MASTER_SEED,
            mode: Mode::Sweep,
            csi: CsiSetting::Estimated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame.k.is_empty()
            || self.frame.pilot_portion.is_empty()
            || self.frame.modulation.is_empty()
            || self.frame.access.is_empty()
            || self.frame.n_users.is_empty()
        {
            return Err(McdmError::Config("every frame grid list must be non-empty".into()));
        }
        if self.snr_grid.is_empty() {
            return Err(McdmError::Config("snr grid must be non-empty".into()));
        }
        if self.n_packets == 0 {
            return Err(McdmError::Config("need at least one packet per point".into()));
        }
        // Guard sufficiency: the zero pad must absorb the whole delay spread.
        if self.channel.fading != Fading::Identity
            && self.channel.profile.max_delay() >= self.frame.t_zp
        {
            return Err(McdmError::Config(format!(
                "max path delay {} s does not fit inside the zero pad {} s",
                self.channel.profile.max_delay(),
                self.frame.t_zp
            )));
        }
        for cfg in self.cells()? {
            cfg.validate()?;
        }
        Ok(())
    }

    /// The frame configurations of the grid, in deterministic order
    /// (K outermost, then pilot portion, modulation, access, users).
    pub fn cells(&self) -> Result<Vec<FrameConfig>> {
        let mut cells = Vec::new();
        for &k in &self.frame.k {
            let chirp = ChirpParams::stock(k)?;
            for portion in &self.frame.pilot_portion {
                let pilot_count = portion.pilot_count(k)?;
                for &modulation in &self.frame.modulation {
                    for &access in &self.frame.access {
                        for &n_users in &self.frame.n_users {
                            cells.push(FrameConfig {
                                chirp,
                                modulation,
                                pilot_count,
                                n_users,
                                access,
                                preamble_len: self.frame.preamble_len,
                                t_pause: self.frame.t_pause,
                                t_zp: self.frame.t_zp,
                                seed: self.frame.frame_seed,
                            });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// Stable identifier for one grid cell.
pub fn config_id(config: &FrameConfig) -> String {
    format!(
        "K{}_Kp{}_{}_{}_u{}",
        config.chirp.k(),
        config.pilot_count,
        config.modulation.as_str(),
        config.access.as_str(),
        config.n_users
    )
}

/// Precomputed per-cell state shared by all trials of that cell.
pub struct Cell {
    pub config: FrameConfig,
    pub id: String,
    pub id_hash: u64,
    pub alloc: UserAllocation,
    pub preamble: BasebandSignal,
    pub fold_len: usize,
}

impl Cell {
    pub fn build(spec: &ExperimentSpec, config: FrameConfig) -> Result<Self> {
        config.validate()?;
        let id = config_id(&config);
        let alloc = allocate_subcarriers(&config)?;
        let preamble = gen_preamble(config.preamble_len, config.seed, config.chirp.fs());
        let fold_len = match spec.channel.fading {
            Fading::Identity => 0,
            _ => (spec.channel.profile.max_delay() * config.chirp.fs()).round() as usize,
        };
        Ok(Self { id_hash: seeds::fnv1a64(&id), id, config, alloc, preamble, fold_len })
    }
}

/// Per-user bit/error counts for one packet at one grid point.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub config_id: String,
    pub snr_db: f64,
    /// user id (1-based) -> (bit errors, bits sent)
    pub per_user: BTreeMap<u32, (u64, u64)>,
    pub sync_failures: u32,
    pub seed_stream: u64,
    pub events: Vec<String>,
}

fn draw_realization(
    spec: &ExperimentSpec,
    fs: f64,
    trial_seed: u64,
) -> ChannelRealization {
    match spec.channel.fading {
        Fading::Identity => ChannelRealization::identity(),
        Fading::Fixed => fixed_realization(&spec.channel.profile, fs),
        Fading::Rayleigh => {
            let mut rng = seeds::stream_rng(trial_seed, &[seeds::CHANNEL_SALT]);
            draw_channel(&spec.channel.profile, fs, &mut rng)
        }
    }
}

/// Generate, transmit, disturb, and receive one packet; deterministic in
/// (master seed, cell id, SNR index, trial index). Stage failures never
/// abort the sweep: they score every payload bit as an error and leave an
/// event line.
pub fn run_trial(
    spec: &ExperimentSpec,
    cell: &Cell,
    snr_db: f64,
    snr_idx: usize,
    trial_idx: usize,
    round_channel: Option<&ChannelRealization>,
) -> TrialReport {
    let trial_seed =
        seeds::stream_seed(spec.master_seed, &[cell.id_hash, snr_idx as u64, trial_idx as u64]);
    let config = &cell.config;
    let bps = config.modulation.bits_per_symbol();

    let mut bits_rng = seeds::stream_rng(trial_seed, &[seeds::BITS_SALT]);
    let tx_bits: Vec<Vec<bool>> = cell
        .alloc
        .users
        .iter()
        .map(|subs| (0..subs.len() * bps).map(|_| rand::Rng::random(&mut bits_rng)).collect())
        .collect();

    let mut report = TrialReport {
        config_id: cell.id.clone(),
        snr_db,
        per_user: BTreeMap::new(),
        sync_failures: 0,
        seed_stream: trial_seed,
        events: Vec::new(),
    };
    let score_all_errors = |report: &mut TrialReport| {
        for (u, bits) in tx_bits.iter().enumerate() {
            report.per_user.insert(u as u32 + 1, (bits.len() as u64, bits.len() as u64));
        }
    };

    let s = match assemble_frequency_vector(config, &cell.alloc, &tx_bits, config.pilot_seed()) {
        Ok(s) => s,
        Err(e) => {
            report.events.push(format!(
                "event=stage_error stage=assemble config={} snr_db={snr_db} trial={trial_idx} err=\"{e}\"",
                cell.id
            ));
            score_all_errors(&mut report);
            return report;
        }
    };
    let pkt = match build_packet(config, &s, tx_bits.clone(), spec.frame.energy) {
        Ok(p) => p,
        Err(e) => {
            report.events.push(format!(
                "event=stage_error stage=build config={} snr_db={snr_db} trial={trial_idx} err=\"{e}\"",
                cell.id
            ));
            score_all_errors(&mut report);
            return report;
        }
    };

    let ch = match round_channel {
        Some(c) => c.clone(),
        None => draw_realization(spec, config.chirp.fs(), trial_seed),
    };
    let faded = apply_channel(&pkt.signal, &ch);
    let power_ref = spec.frame.energy * spec.channel.profile.total_power();
    let mut noise_rng = seeds::stream_rng(trial_seed, &[seeds::NOISE_SALT]);
    let noisy = match add_awgn(&faded, snr_db, power_ref, &mut noise_rng) {
        Ok(n) => n,
        Err(e) => {
            report.events.push(format!(
                "event=stage_error stage=awgn config={} snr_db={snr_db} trial={trial_idx} err=\"{e}\"",
                cell.id
            ));
            score_all_errors(&mut report);
            return report;
        }
    };

    let h_true;
    let mut params = match spec.csi {
        CsiSetting::Estimated => RxParams::estimated(config.pilot_seed(), cell.fold_len),
        CsiSetting::Perfect => {
            h_true = ch.freq_response(config.chirp.k());
            RxParams::perfect(&h_true, 0, cell.fold_len)
        }
    };
    params.energy = spec.frame.energy;

    match receive_packet(&noisy, config, &cell.alloc, &cell.preamble, &params) {
        Ok(RxOutcome::Detected(rx)) => {
            for (u, tx) in tx_bits.iter().enumerate() {
                let got = &rx.detection.bits_per_user[u];
                let erased = &rx.detection.erasures_per_user[u];
                let errors = tx
                    .iter()
                    .zip(got)
                    .zip(erased)
                    .filter(|((a, b), e)| **e || a != b)
                    .count() as u64;
                report.per_user.insert(u as u32 + 1, (errors, tx.len() as u64));
            }
        }
        Ok(RxOutcome::Lost { .. }) => {
            report.sync_failures = 1;
            report.events.push(format!(
                "event=sync_failure config={} snr_db={snr_db} trial={trial_idx}",
                cell.id
            ));
            score_all_errors(&mut report);
        }
        Err(e) => {
            report.events.push(format!(
                "event=stage_error stage=receive config={} snr_db={snr_db} trial={trial_idx} err=\"{e}\"",
                cell.id
            ));
            score_all_errors(&mut report);
        }
    }
    report
}

/// Aggregated counts at one (configuration, SNR) grid point.
#[derive(Debug, Clone)]
pub struct PointAggregate {
    pub config_id: String,
    pub k: usize,
    pub kp: usize,
    pub modulation: Modulation,
    pub access: AccessScheme,
    pub n_users: usize,
    pub snr_db: f64,
    /// user id (1-based) -> (errors, bits); exact integer accumulation.
    pub per_user: BTreeMap<u32, (u64, u64)>,
    pub sync_failures: u64,
}

impl PointAggregate {
    /// BER averaged over all users: total errors / total bits.
    pub fn average_ber(&self) -> f64 {
        let (e, b) = self
            .per_user
            .values()
            .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
        e as f64 / b as f64
    }

    pub fn user_ber(&self, user: u32) -> Option<f64> {
        self.per_user.get(&user).map(|&(e, b)| e as f64 / b as f64)
    }
}

/// Sweep output: one aggregate per grid point plus the ordered event log.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<PointAggregate>,
    pub events: Vec<String>,
}

fn aggregate_point(
    cell: &Cell,
    snr_db: f64,
    reports: Vec<TrialReport>,
) -> (PointAggregate, Vec<String>) {
    let mut per_user: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    let mut sync_failures = 0u64;
    let mut events = Vec::new();
    for r in reports {
        for (&u, &(e, b)) in &r.per_user {
            let slot = per_user.entry(u).or_insert((0, 0));
            slot.0 += e;
            slot.1 += b;
        }
        sync_failures += u64::from(r.sync_failures);
        events.extend(r.events);
    }
    (
        PointAggregate {
            config_id: cell.id.clone(),
            k: cell.config.chirp.k(),
            kp: cell.config.pilot_count,
            modulation: cell.config.modulation,
            access: cell.config.access,
            n_users: cell.config.n_users,
            snr_db,
            per_user,
            sync_failures,
        },
        events,
    )
}

/// Run the full grid. Trials fan out across the rayon pool; aggregation is
/// associative integer merging, so the result is independent of worker count.
pub fn sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut points = Vec::new();
    let mut events = Vec::new();
    for config in spec.cells()? {
        let cell = Cell::build(spec, config)?;
        for (snr_idx, &snr_db) in spec.snr_grid.iter().enumerate() {
            let reports: Vec<TrialReport> = (0..spec.n_packets)
                .into_par_iter()
                .map(|t| run_trial(spec, &cell, snr_db, snr_idx, t, None))
                .collect();
            let (point, evs) = aggregate_point(&cell, snr_db, reports);
            points.push(point);
            events.extend(evs);
        }
    }
    Ok(SweepResult { points, events })
}

/// Identity-channel, zero-noise run over the whole grid.
#[derive(Debug, Clone)]
pub struct LoopbackOutcome {
    /// (config id, errors, bits) per grid cell.
    pub per_config: Vec<(String, u64, u64)>,
    pub total_errors: u64,
    pub total_bits: u64,
}

pub fn loopback_run(spec: &ExperimentSpec) -> Result<LoopbackOutcome> {
    let mut spec = spec.clone();
    spec.channel.fading = Fading::Identity;
    spec.snr_grid = vec![f64::INFINITY];
    spec.validate()?;
    let mut per_config = Vec::new();
    let mut total_errors = 0u64;
    let mut total_bits = 0u64;
    for config in spec.cells()? {
        let cell = Cell::build(&spec, config)?;
        let reports: Vec<TrialReport> = (0..spec.n_packets)
            .into_par_iter()
            .map(|t| run_trial(&spec, &cell, f64::INFINITY, 0, t, None))
            .collect();
        let (point, _) = aggregate_point(&cell, f64::INFINITY, reports);
        let (e, b) = point
            .per_user
            .values()
            .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
        per_config.push((cell.id.clone(), e, b));
        total_errors += e;
        total_bits += b;
    }
    Ok(LoopbackOutcome { per_config, total_errors, total_bits })
}

/// Per-packet probe record of an adaptive run.
#[derive(Debug, Clone)]
pub struct PacketProbe {
    pub index: usize,
    pub k: usize,
    pub errors: u64,
    pub bits: u64,
}

/// Adaptive-run output: the decision, the per-packet BER trace, and the
/// event log (one feedback event per round).
#[derive(Debug, Clone)]
pub struct AdaptOutcome {
    pub decision: AdaptationDecision,
    pub trace: Vec<PacketProbe>,
    pub events: Vec<String>,
}

/// Execute the probe schedule at one SNR over a quasi-static channel (one
/// fading draw per round), measure per-candidate BER, select, and feed the
/// decision back.
pub fn adapt_run(spec: &ExperimentSpec) -> Result<AdaptOutcome> {
    spec.validate()?;
    if spec.snr_grid.len() != 1 {
        return Err(McdmError::Config(format!(
            "adaptive runs use a single SNR, got {} grid points",
            spec.snr_grid.len()
        )));
    }
    let snr_db = spec.snr_grid[0];
    let candidates = spec.cells()?;
    if candidates.len() != spec.frame.k.len() {
        return Err(McdmError::Config(
            "adaptive candidates must vary only the subcarrier count".into(),
        ));
    }
    let schedule = default_schedule(&candidates, spec.n_packets)?;

    // One fading draw per round, shared across candidates; delays re-quantized
    // at each candidate's sample rate.
    let gains = match spec.channel.fading {
        Fading::Rayleigh => {
            let mut rng = seeds::stream_rng(spec.master_seed, &[seeds::ROUND_SALT]);
            Some(draw_gains(&spec.channel.profile, &mut rng))
        }
        _ => None,
    };

    let mut probe_results: Vec<ProbeResult> = Vec::new();
    let mut trace = Vec::new();
    let mut events = Vec::new();
    for entry in &schedule.entries {
        let cell = Cell::build(spec, entry.config.clone())?;
        let ch = match &gains {
            Some(g) => realize_with_gains(&spec.channel.profile, g, entry.config.chirp.fs()),
            None => draw_realization(spec, entry.config.chirp.fs(), 0),
        };
        let mut errors = 0u64;
        let mut bits = 0u64;
        for packet_index in entry.packets.clone() {
            let report = run_trial(spec, &cell, snr_db, 0, packet_index, Some(&ch));
            let (e, b) = report
                .per_user
                .values()
                .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
            errors += e;
            bits += b;
            events.extend(report.events);
            trace.push(PacketProbe { index: packet_index, k: cell.config.chirp.k(), errors: e, bits: b });
        }
        probe_results.push(ProbeResult { config: entry.config.clone(), bit_errors: errors, bits });
    }

    let decision = select_config(&probe_results)?;
    let chosen = crate::adaptation::feedback(&decision);
    events.push(format!(
        "event=feedback chosen={} snr_db={snr_db} rationale=\"{}\"",
        config_id(&chosen),
        decision.rationale
    ));
    Ok(AdaptOutcome { decision, trace, events })
}
