//! Baseband simulator for multiuser multicarrier chirp-division multiplexing
//! (MU-MCDM) links.
//!
//! Subcarriers are linear chirps sharing one chirp rate; the analysis/synthesis
//! pair between time samples and chirp-subcarrier coefficients is the discrete
//! orthogonal chirp transform (DOCT) and its inverse. On top of the transform
//! core sit a packet transmitter, an underwater-style multipath channel
//! emulator, a coherent receiver (preamble synchronization, pilot-based
//! channel estimation, ML detection), an adaptive configuration policy, and a
//! Monte Carlo harness that sweeps BER over (configuration, SNR) grids.
//!
//! The crate is organized to mirror the signal path:
//!
//! - [`chirp`] — chirp basis, DOCT/IDOCT, fast factorized transforms,
//!   continuous-transform quadrature oracle.
//! - [`transmitter`] — constellation mapping, subcarrier allocation, pilot
//!   insertion, packet assembly.
//! - [`channel`] — Rayleigh tapped-delay-line emulation, AWGN, timing offsets.
//! - [`receiver`] — synchronization, demodulation, estimation, detection.
//! - [`adaptation`] — probe scheduling and configuration selection.
//! - [`harness`] — seeded trial engine, sweeps, oracle curves, CSV output.

pub mod adaptation;
pub mod channel;
pub mod chirp;
pub mod error;
pub mod harness;
pub mod receiver;
pub mod seeds;
pub mod transmitter;

pub use error::{McdmError, Result};
