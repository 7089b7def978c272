//! Experiment configuration files: TOML with sections mirroring the domain
//! types. The literal name `default` selects the built-in stock experiment.
//!
//! ```toml
//! mode = "sweep"              # sweep | adapt | loopback
//! master_seed = 20260810
//! n_packets = 1000
//! csi = "estimated"           # estimated | perfect
//!
//! [frame]
//! k = [128, 256, 512, 1024]
//! pilot_portion = ["1/4"]
//! modulation = ["bpsk"]       # bpsk | qpsk
//! access = ["block"]          # block | comb
//! n_users = [1]
//! preamble_len = 86
//! t_pause_ms = 1.54
//! t_zp_ms = 2.56
//! energy = 1.0
//!
//! [snr]
//! db = [0, 2, 4, 6, 8, 10, 12, 14]
//!
//! [channel]
//! delays_ms = [0.0, 0.505, 0.63, 0.78]
//! mean_powers = [0.60, 0.16, 0.13, 0.11]
//! carrier_hz = 100000.0
//! fading = "rayleigh"         # rayleigh | fixed | identity
//! ```

use serde::Deserialize;

use super::{CsiSetting, ExperimentSpec, Fading, Mode, PilotPortion};
use crate::channel::ChannelProfile;
use crate::error::{McdmError, Result};
use crate::transmitter::{AccessScheme, Modulation};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRoot {
    mode: Option<String>,
    master_seed: Option<u64>,
    n_packets: Option<usize>,
    csi: Option<String>,
    frame: Option<FileFrame>,
    snr: Option<FileSnr>,
    channel: Option<FileChannel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFrame {
    k: Option<Vec<usize>>,
    pilot_portion: Option<Vec<String>>,
    modulation: Option<Vec<String>>,
    access: Option<Vec<String>>,
    n_users: Option<Vec<usize>>,
    preamble_len: Option<usize>,
    t_pause_ms: Option<f64>,
    t_zp_ms: Option<f64>,
    energy: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSnr {
    db: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileChannel {
    delays_ms: Option<Vec<f64>>,
    mean_powers: Option<Vec<f64>>,
    carrier_hz: Option<f64>,
    fading: Option<String>,
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s.to_ascii_lowercase().as_str() {
        "sweep" => Ok(Mode::Sweep),
        "adapt" => Ok(Mode::Adapt),
        "loopback" => Ok(Mode::Loopback),
        other => Err(McdmError::Config(format!(
            "mode: unknown value `{other}` (expected sweep, adapt, loopback)"
        ))),
    }
}

fn parse_csi(s: &str) -> Result<CsiSetting> {
    match s.to_ascii_lowercase().as_str() {
        "estimated" => Ok(CsiSetting::Estimated),
        "perfect" => Ok(CsiSetting::Perfect),
        other => Err(McdmError::Config(format!(
            "csi: unknown value `{other}` (expected estimated, perfect)"
        ))),
    }
}

fn parse_modulation(s: &str) -> Result<Modulation> {
    match s.to_ascii_lowercase().as_str() {
        "bpsk" => Ok(Modulation::Bpsk),
        "qpsk" => Ok(Modulation::Qpsk),
        other => Err(McdmError::Config(format!(
            "frame.modulation: unknown value `{other}` (expected bpsk, qpsk)"
        ))),
    }
}

fn parse_access(s: &str) -> Result<AccessScheme> {
    match s.to_ascii_lowercase().as_str() {
        "block" => Ok(AccessScheme::Block),
        "comb" => Ok(AccessScheme::Comb),
        other => Err(McdmError::Config(format!(
            "frame.access: unknown value `{other}` (expected block, comb)"
        ))),
    }
}

fn parse_fading(s: &str) -> Result<Fading> {
    match s.to_ascii_lowercase().as_str() {
        "rayleigh" => Ok(Fading::Rayleigh),
        "fixed" => Ok(Fading::Fixed),
        "identity" => Ok(Fading::Identity),
        other => Err(McdmError::Config(format!(
            "channel.fading: unknown value `{other}` (expected rayleigh, fixed, identity)"
        ))),
    }
}

/// Parse TOML text into an experiment, filling unset keys from the stock
/// experiment. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let file: FileRoot =
        toml::from_str(text).map_err(|e| McdmError::Config(format!("config parse: {e}")))?;
    let mut spec = ExperimentSpec::stock();

    if let Some(mode) = &file.mode {
        spec.mode = parse_mode(mode)?;
        if spec.mode == Mode::Adapt {
            spec.n_packets = 10;
            spec.snr_grid = vec![12.0];
        }
    }
    if let Some(seed) = file.master_seed {
        spec.master_seed = seed;
    }
    if let Some(n) = file.n_packets {
        spec.n_packets = n;
    }
    if let Some(csi) = &file.csi {
        spec.csi = parse_csi(csi)?;
    }

    if let Some(frame) = &file.frame {
        if let Some(k) = &frame.k {
            spec.frame.k = k.clone();
        }
        if let Some(portions) = &frame.pilot_portion {
            spec.frame.pilot_portion =
                portions.iter().map(|p| PilotPortion::parse(p)).collect::<Result<_>>()?;
        }
        if let Some(mods) = &frame.modulation {
            spec.frame.modulation =
                mods.iter().map(|m| parse_modulation(m)).collect::<Result<_>>()?;
        }
        if let Some(access) = &frame.access {
            spec.frame.access = access.iter().map(|a| parse_access(a)).collect::<Result<_>>()?;
        }
        if let Some(users) = &frame.n_users {
            spec.frame.n_users = users.clone();
        }
        if let Some(p) = frame.preamble_len {
            spec.frame.preamble_len = p;
        }
        if let Some(t) = frame.t_pause_ms {
            spec.frame.t_pause = t * 1e-3;
        }
        if let Some(t) = frame.t_zp_ms {
            spec.frame.t_zp = t * 1e-3;
        }
        if let Some(e) = frame.energy {
            spec.frame.energy = e;
        }
        if let Some(s) = frame.seed {
            spec.frame.frame_seed = s;
        }
    }

    if let Some(snr) = &file.snr {
        if let Some(db) = &snr.db {
            spec.snr_grid = db.clone();
        }
    }

    if let Some(ch) = &file.channel {
        let stock = ChannelProfile::default_four_path();
        let delays: Vec<f64> = ch
            .delays_ms
            .clone()
            .map(|v| v.iter().map(|d| d * 1e-3).collect())
            .unwrap_or_else(|| stock.delays().to_vec());
        let powers = ch.mean_powers.clone().unwrap_or_else(|| stock.mean_powers().to_vec());
        let f_c = ch.carrier_hz.unwrap_or(stock.f_c());
        spec.channel.profile = ChannelProfile::with_normalized_powers(delays, powers, f_c)
            .map_err(|e| McdmError::Config(format!("channel: {e}")))?;
        if let Some(fading) = &ch.fading {
            spec.channel.fading = parse_fading(fading)?;
        }
    }

    spec.validate()?;
    Ok(spec)
}

/// Load a configuration: the literal string `default` means the built-in
/// stock experiment; anything else is a TOML file path.
pub fn load_config(path: &str) -> Result<ExperimentSpec> {
    if path == "default" {
        return Ok(ExperimentSpec::stock());
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| McdmError::Config(format!("cannot read config `{path}`: {e}")))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config_id;

    #[test]
    fn default_keyword_gives_stock_experiment() {
        let spec = load_config("default").unwrap();
        assert_eq!(spec.frame.k, vec![128, 256, 512, 1024]);
        assert_eq!(spec.n_packets, 1000);
    }

    #[test]
    fn full_file_round_trips() {
        let spec = parse_config(
            r#"
            mode = "sweep"
            master_seed = 7
            n_packets = 50
            csi = "perfect"

            [frame]
            k = [256]
            pilot_portion = ["1/8"]
            modulation = ["qpsk"]
            access = ["comb"]
            n_users = [3]

            [snr]
            db = [0.0, 6.0, 12.0]

            [channel]
            delays_ms = [0.0, 0.4]
            mean_powers = [3.0, 1.0]
            fading = "fixed"
            "#,
        )
        .unwrap();
        assert_eq!(spec.master_seed, 7);
        assert_eq!(spec.csi, CsiSetting::Perfect);
        assert_eq!(spec.channel.fading, Fading::Fixed);
        let cells = spec.cells().unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(config_id(&cells[0]), "K256_Kp32_qpsk_comb_u3");
        assert!((spec.channel.profile.mean_powers()[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_named_in_error() {
        let err = parse_config("[frame]\nnot_a_knob = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not_a_knob"), "message should name the key: {msg}");
    }

    #[test]
    fn bad_enum_value_is_named() {
        let err = parse_config("[frame]\nmodulation = [\"qam64\"]\n").unwrap_err();
        assert!(err.to_string().contains("qam64"));
    }

    #[test]
    fn bad_pilot_portion_is_rejected() {
        assert!(parse_config("[frame]\npilot_portion = [\"zero\"]\n").is_err());
        assert!(parse_config("[frame]\npilot_portion = [\"1/3\"]\n").is_err());
    }

    #[test]
    fn adapt_mode_defaults_to_ten_packets_at_12_db() {
        let spec = parse_config("mode = \"adapt\"\n").unwrap();
        assert_eq!(spec.n_packets, 10);
        assert_eq!(spec.snr_grid, vec![12.0]);
    }
}
