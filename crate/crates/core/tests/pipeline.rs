//! Cross-module integration checks that exercise the harness the way the
//! experiments do.

use mcdm_core::channel::ChannelProfile;
use mcdm_core::harness::oracle::{oracle_ber, OracleKind};
use mcdm_core::harness::{
    adapt_run, config_id, sweep, CsiSetting, ExperimentSpec, Fading, Mode,
};
use mcdm_core::transmitter::AccessScheme;

/// Post-decision average BER of a comb-type adaptive link should not exceed
/// the block-type one beyond statistical slack: averaged over all users both
/// schemes load the same subcarrier set.
#[test]
fn comb_adaptive_run_is_no_worse_than_block_on_average() {
    let mut results = Vec::new();
    for access in [AccessScheme::Block, AccessScheme::Comb] {
        let mut spec = ExperimentSpec::stock();
        spec.mode = Mode::Adapt;
        spec.snr_grid = vec![12.0];
        spec.n_packets = 10;
        spec.frame.access = vec![access];
        spec.frame.n_users = vec![4];
        spec.master_seed = 0xC0B;
        let decision = adapt_run(&spec).unwrap().decision;

        let mut post = ExperimentSpec::stock();
        post.frame.k = vec![decision.chosen.chirp.k()];
        post.frame.access = vec![access];
        post.frame.n_users = vec![4];
        post.snr_grid = vec![12.0];
        post.n_packets = 400;
        post.master_seed = 0xC0B;
        let result = sweep(&post).unwrap();
        let point = &result.points[0];
        let (e, b) = point
            .per_user
            .values()
            .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
        results.push((access, e as f64 / b as f64, b));
    }
    let (_, block_ber, block_bits) = results[0];
    let (_, comb_ber, comb_bits) = results[1];
    let slack = 3.0
        * (block_ber * (1.0 - block_ber) / block_bits as f64
            + comb_ber * (1.0 - comb_ber) / comb_bits as f64)
            .sqrt()
        // per-packet clustering widens the spread well beyond binomial
        * 5.0;
    assert!(
        comb_ber <= block_ber + slack,
        "comb post-decision ber {comb_ber:.5} vs block {block_ber:.5} (slack {slack:.5})"
    );
}

/// Spot trial from the harness contract: single-tap Rayleigh, perfect CSI,
/// BPSK at 10 dB average SNR lands on the closed form 0.0233 within 0.0015.
#[test]
fn rayleigh_spot_trial_matches_closed_form() {
    let mut spec = ExperimentSpec::stock();
    spec.frame.k = vec![256];
    spec.csi = CsiSetting::Perfect;
    spec.channel.fading = Fading::Rayleigh;
    spec.channel.profile =
        ChannelProfile::with_normalized_powers(vec![0.0], vec![1.0], 0.0).unwrap();
    spec.snr_grid = vec![10.0];
    spec.n_packets = 6000; // > 1e6 bits at 192 bits/packet
    let result = sweep(&spec).unwrap();
    let (e, b) = result.points[0]
        .per_user
        .values()
        .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
    assert!(b > 1_000_000);
    let measured = e as f64 / b as f64;
    let expect = oracle_ber(OracleKind::RayleighBpsk, 10.0);
    assert!(
        (measured - expect).abs() < 1.5e-3,
        "measured {measured:.5} vs closed form {expect:.5}"
    );
}

/// Multiuser sweep bookkeeping: every user reports, loads are equal, and the
/// average equals total errors over total bits.
#[test]
fn multiuser_sweep_reports_every_user() {
    let mut spec = ExperimentSpec::stock();
    spec.frame.k = vec![256];
    spec.frame.n_users = vec![3];
    spec.frame.access = vec![AccessScheme::Comb];
    spec.snr_grid = vec![8.0];
    spec.n_packets = 50;
    let result = sweep(&spec).unwrap();
    assert_eq!(result.points.len(), 1);
    let point = &result.points[0];
    assert_eq!(config_id(&spec.cells().unwrap()[0]), point.config_id);
    assert_eq!(point.per_user.len(), 3);
    let loads: Vec<u64> = point.per_user.values().map(|&(_, b)| b).collect();
    assert!(loads.windows(2).all(|w| w[0] == w[1]), "unequal user loads {loads:?}");
    let (e, b) = point
        .per_user
        .values()
        .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
    assert!((point.average_ber() - e as f64 / b as f64).abs() < 1e-15);
}
