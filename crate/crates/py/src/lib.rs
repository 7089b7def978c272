//! Python bindings: chirp transforms, constellation mapping, and harness
//! entry points, driven in-process from Python.
//!
//! Build the cdylib with `cargo build -p mcdm-py --release`; the smoke test
//! in `python/smoke_test.py` copies it next to itself as `mcdm_py.so` and
//! imports it.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mcdm_core::channel::ChannelProfile;
use mcdm_core::chirp::{self, BasebandSignal, FrequencyVector};
use mcdm_core::harness::oracle::{oracle_ber as oracle_ber_rs, OracleKind};
use mcdm_core::harness::{
    adapt_run, loopback_run, sweep, CsiSetting, ExperimentSpec, Fading, Mode, PilotPortion,
};
use mcdm_core::transmitter::{gray_map as gray_map_rs, Modulation};
use mcdm_core::McdmError;

fn to_py_err(e: McdmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_modulation(s: &str) -> PyResult<Modulation> {
    match s.to_ascii_lowercase().as_str() {
        "bpsk" => Ok(Modulation::Bpsk),
        "qpsk" => Ok(Modulation::Qpsk),
        other => Err(PyValueError::new_err(format!("unknown modulation `{other}`"))),
    }
}

/// Chirp symbol parameters: subcarrier count, spacing, chirp rate, sampling.
#[pyclass(name = "ChirpParams", from_py_object)]
#[derive(Clone)]
struct PyChirpParams {
    inner: chirp::ChirpParams,
}

#[pymethods]
impl PyChirpParams {
    #[new]
    fn new(k: usize, delta_f: f64, mu: f64) -> PyResult<Self> {
        Ok(Self { inner: chirp::ChirpParams::new(k, delta_f, mu).map_err(to_py_err)? })
    }

    /// One of the stock configurations (K in {128, 256, 512, 1024}).
    #[staticmethod]
    fn stock(k: usize) -> PyResult<Self> {
        Ok(Self { inner: chirp::ChirpParams::stock(k).map_err(to_py_err)? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.fs()
    }

    #[getter]
    fn delta_f(&self) -> f64 {
        self.inner.delta_f()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn t_symbol(&self) -> f64 {
        self.inner.t_symbol()
    }

    fn has_fast_transform(&self) -> bool {
        self.inner.has_fast_transform()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChirpParams(k={}, delta_f={}, mu={})",
            self.inner.k(),
            self.inner.delta_f(),
            self.inner.mu()
        )
    }
}

/// Samples of the m-th chirp basis waveform.
#[pyfunction]
fn chirp_waveform(params: &PyChirpParams, m: usize) -> PyResult<Vec<Complex64>> {
    Ok(chirp::chirp_waveform(&params.inner, m).map_err(to_py_err)?.into_samples())
}

/// Inner product of sampled basis waveforms k and l.
#[pyfunction]
fn cross_correlation(params: &PyChirpParams, k: usize, l: usize) -> PyResult<Complex64> {
    chirp::cross_correlation(&params.inner, k, l).map_err(to_py_err)
}

/// Forward transform, direct summation.
#[pyfunction]
fn doct(samples: Vec<Complex64>, params: &PyChirpParams) -> PyResult<Vec<Complex64>> {
    let x = BasebandSignal::new(samples, params.inner.fs()).map_err(to_py_err)?;
    Ok(chirp::doct(&x, &params.inner).map_err(to_py_err)?.into_vec())
}

/// Forward transform, factorized fast path.
#[pyfunction]
fn doct_fast(samples: Vec<Complex64>, params: &PyChirpParams) -> PyResult<Vec<Complex64>> {
    let x = BasebandSignal::new(samples, params.inner.fs()).map_err(to_py_err)?;
    Ok(chirp::doct_fast(&x, &params.inner).map_err(to_py_err)?.into_vec())
}

/// Inverse transform, direct summation.
#[pyfunction]
fn idoct(coeffs: Vec<Complex64>, params: &PyChirpParams) -> PyResult<Vec<Complex64>> {
    Ok(chirp::idoct(&FrequencyVector::new(coeffs), &params.inner)
        .map_err(to_py_err)?
        .into_samples())
}

/// Inverse transform, factorized fast path.
#[pyfunction]
fn idoct_fast(coeffs: Vec<Complex64>, params: &PyChirpParams) -> PyResult<Vec<Complex64>> {
    Ok(chirp::idoct_fast(&FrequencyVector::new(coeffs), &params.inner)
        .map_err(to_py_err)?
        .into_samples())
}

/// Gray-coded constellation mapping ("bpsk" or "qpsk").
#[pyfunction]
fn gray_map(bits: Vec<bool>, modulation: &str) -> PyResult<Vec<Complex64>> {
    gray_map_rs(&bits, parse_modulation(modulation)?).map_err(to_py_err)
}

/// Closed-form reference BER ("awgn_bpsk", "awgn_qpsk", "rayleigh_bpsk").
#[pyfunction]
fn oracle_ber(kind: &str, snr_db: f64) -> PyResult<f64> {
    Ok(oracle_ber_rs(OracleKind::parse(kind).map_err(to_py_err)?, snr_db))
}

/// Identity-channel, zero-noise run of one stock configuration;
/// returns (bit_errors, bits).
#[pyfunction]
#[pyo3(signature = (k, packets=1, seed=20260810))]
fn loopback_check(k: usize, packets: usize, seed: u64) -> PyResult<(u64, u64)> {
    let mut spec = ExperimentSpec::stock();
    spec.frame.k = vec![k];
    spec.mode = Mode::Loopback;
    spec.n_packets = packets;
    spec.master_seed = seed;
    let out = loopback_run(&spec).map_err(to_py_err)?;
    Ok((out.total_errors, out.total_bits))
}

/// One Monte Carlo grid point on the default four-path Rayleigh channel
/// (pilot portion 1/4, BPSK, block access); returns (errors, bits, ber).
#[pyfunction]
#[pyo3(signature = (k, snr_db, packets=200, seed=20260810, csi="estimated"))]
fn ber_point(k: usize, snr_db: f64, packets: usize, seed: u64, csi: &str) -> PyResult<(u64, u64, f64)> {
    let mut spec = ExperimentSpec::stock();
    spec.frame.k = vec![k];
    spec.snr_grid = vec![snr_db];
    spec.n_packets = packets;
    spec.master_seed = seed;
    spec.csi = match csi.to_ascii_lowercase().as_str() {
        "perfect" => CsiSetting::Perfect,
        "estimated" => CsiSetting::Estimated,
        other => return Err(PyValueError::new_err(format!("unknown csi `{other}`"))),
    };
    let result = sweep(&spec).map_err(to_py_err)?;
    let point = &result.points[0];
    let (e, b) = point
        .per_user
        .values()
        .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
    Ok((e, b, e as f64 / b as f64))
}

/// One flat-channel grid point (identity or single-tap Rayleigh) with
/// perfect CSI, for closed-form comparisons; returns (errors, bits, ber).
#[pyfunction]
#[pyo3(signature = (snr_db, packets=2000, seed=20260810, fading="identity"))]
fn flat_ber_point(snr_db: f64, packets: usize, seed: u64, fading: &str) -> PyResult<(u64, u64, f64)> {
    let mut spec = ExperimentSpec::stock();
    spec.frame.k = vec![256];
    spec.snr_grid = vec![snr_db];
    spec.n_packets = packets;
    spec.master_seed = seed;
    spec.csi = CsiSetting::Perfect;
    spec.channel.profile =
        ChannelProfile::with_normalized_powers(vec![0.0], vec![1.0], 0.0).map_err(to_py_err)?;
    spec.channel.fading = match fading.to_ascii_lowercase().as_str() {
        "identity" => Fading::Identity,
        "rayleigh" => Fading::Rayleigh,
        other => return Err(PyValueError::new_err(format!("unknown fading `{other}`"))),
    };
    let result = sweep(&spec).map_err(to_py_err)?;
    let (e, b) = result.points[0]
        .per_user
        .values()
        .fold((0u64, 0u64), |(ae, ab), &(e, b)| (ae + e, ab + b));
    Ok((e, b, e as f64 / b as f64))
}

/// One adaptive round (4/2/2/2 probe schedule over the stock subcarrier
/// counts); returns the chosen K.
#[pyfunction]
#[pyo3(signature = (seed, snr_db=12.0))]
fn adapt_round(seed: u64, snr_db: f64) -> PyResult<usize> {
    let mut spec = ExperimentSpec::stock();
    spec.mode = Mode::Adapt;
    spec.snr_grid = vec![snr_db];
    spec.n_packets = 10;
    spec.master_seed = seed;
    spec.frame.pilot_portion = vec![PilotPortion { num: 1, den: 4 }];
    let out = adapt_run(&spec).map_err(to_py_err)?;
    Ok(out.decision.chosen.chirp.k())
}

#[pymodule]
fn mcdm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChirpParams>()?;
    m.add_function(wrap_pyfunction!(chirp_waveform, m)?)?;
    m.add_function(wrap_pyfunction!(cross_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(doct, m)?)?;
    m.add_function(wrap_pyfunction!(doct_fast, m)?)?;
    m.add_function(wrap_pyfunction!(idoct, m)?)?;
    m.add_function(wrap_pyfunction!(idoct_fast, m)?)?;
    m.add_function(wrap_pyfunction!(gray_map, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_ber, m)?)?;
    m.add_function(wrap_pyfunction!(loopback_check, m)?)?;
    m.add_function(wrap_pyfunction!(ber_point, m)?)?;
    m.add_function(wrap_pyfunction!(flat_ber_point, m)?)?;
    m.add_function(wrap_pyfunction!(adapt_round, m)?)?;
    Ok(())
}
