//! Deterministic seed derivation for per-trial RNG streams.
//!
//! Every random quantity in the simulator is drawn from a stream keyed by
//! (master seed, purpose, trial coordinates) so that reruns are bit-identical
//! and independent of worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a well-mixed 64-bit permutation step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a salt into a seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// Fold an ordered list of coordinates into one stream seed.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, &p| mix(acc, p))
}

/// ChaCha stream for a derived seed.
pub fn stream_rng(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, parts))
}

/// FNV-1a over a string; used to key streams by configuration id.
pub fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Salt for the pilot-symbol stream derived from a frame seed.
pub const PILOT_SALT: u64 = 0x5049_4c4f_5453;
/// Salt for the null-user dummy-symbol stream.
pub const NULL_SALT: u64 = 0x4e55_4c4c_5553;
/// Salt for payload bit streams.
pub const BITS_SALT: u64 = 0x4249_5453;
/// Salt for channel realization streams.
pub const CHANNEL_SALT: u64 = 0x4348_414e;
/// Salt for noise streams.
pub const NOISE_SALT: u64 = 0x4e_4f49_5345;
/// Salt for the per-round channel draw in adaptive runs.
pub const ROUND_SALT: u64 = 0x52_4f55_4e44;
