//! Command-line front end: loopback checks, BER sweeps, adaptive runs, and
//! closed-form oracle curves.
//!
//! Exit codes: 0 success, 1 configuration error, 2 loopback acceptance
//! failure (bit errors detected).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcdm_core::harness::config::load_config;
use mcdm_core::harness::csv::{
    adapt_csv_string, oracle_csv_string, sweep_csv_string, write_adapt_csv, write_oracle_csv,
    write_sweep_csv,
};
use mcdm_core::harness::oracle::{oracle_curve, OracleKind};
use mcdm_core::harness::{adapt_run, config_id, loopback_run, sweep, CsiSetting, ExperimentSpec, Mode};
use mcdm_core::McdmError;

#[derive(Parser)]
#[command(name = "mcdm", about = "Multiuser multicarrier chirp-division multiplexing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity-channel, zero-noise check over the configuration grid.
    Loopback(RunArgs),
    /// Monte Carlo BER sweep over the (configuration, SNR) grid.
    Sweep(RunArgs),
    /// Probe schedule, selection, and feedback at one SNR.
    Adapt(RunArgs),
    /// Closed-form reference BER curves.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file path, or `default` for the built-in experiment.
    #[arg(long, default_value = "default")]
    config: String,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// SNR grid override, comma-separated dB values.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// Packets per grid point override.
    #[arg(long)]
    packets: Option<usize>,
    /// Channel knowledge at the receiver.
    #[arg(long, value_parser = ["perfect", "estimated"])]
    csi: Option<String>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Curve kind: awgn_bpsk, awgn_qpsk, or rayleigh_bpsk.
    #[arg(long)]
    kind: String,
    /// SNR grid, comma-separated dB values.
    #[arg(long, value_delimiter = ',', required = true)]
    snr: Vec<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

fn apply_overrides(spec: &mut ExperimentSpec, args: &RunArgs) -> Result<(), McdmError> {
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(snr) = &args.snr {
        spec.snr_grid = snr.clone();
    }
    if let Some(packets) = args.packets {
        spec.n_packets = packets;
    }
    if let Some(csi) = &args.csi {
        spec.csi = match csi.as_str() {
            "perfect" => CsiSetting::Perfect,
            _ => CsiSetting::Estimated,
        };
    }
    if let Some(jobs) = args.jobs {
        // Ignore failure: the global pool can only be installed once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    Ok(())
}

fn write_output(name: Option<&str>, content: &str) -> Result<(), McdmError> {
    match name {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(content.as_bytes())?;
            w.flush()?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn run() -> Result<ExitCode, McdmError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Loopback(args) => {
            let mut spec = load_config(&args.config)?;
            apply_overrides(&mut spec, &args)?;
            spec.mode = Mode::Loopback;
            if args.packets.is_none() {
                spec.n_packets = 1;
            }
            let out = loopback_run(&spec)?;
            println!(
                "loopback: {} bit errors over {} bits across {} configurations",
                out.total_errors,
                out.total_bits,
                out.per_config.len()
            );
            if out.total_errors > 0 {
                for (id, errors, bits) in out.per_config.iter().filter(|(_, e, _)| *e > 0) {
                    eprintln!("event=loopback_failure config={id} errors={errors} bits={bits}");
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let mut spec = load_config(&args.config)?;
            apply_overrides(&mut spec, &args)?;
            spec.mode = Mode::Sweep;
            let result = sweep(&spec)?;
            for line in &result.events {
                eprintln!("{line}");
            }
            if let Some(path) = &args.out {
                let mut w = BufWriter::new(File::create(path)?);
                write_sweep_csv(&result.points, &mut w)?;
                w.flush()?;
            } else {
                print!("{}", sweep_csv_string(&result.points));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Adapt(args) => {
            let mut spec = load_config(&args.config)?;
            spec.mode = Mode::Adapt;
            if spec.snr_grid.len() != 1 {
                spec.snr_grid = vec![12.0];
            }
            if args.packets.is_none() && spec.n_packets > 100 {
                spec.n_packets = 10;
            }
            apply_overrides(&mut spec, &args)?;
            let out = adapt_run(&spec)?;
            for line in &out.events {
                eprintln!("{line}");
            }
            println!("chosen config: {}", config_id(&out.decision.chosen));
            for (k, ber) in &out.decision.per_candidate_ber {
                println!("candidate K={k}: measured ber {ber}");
            }
            if let Some(path) = &args.out {
                let mut w = BufWriter::new(File::create(path)?);
                write_adapt_csv(&out.trace, &mut w)?;
                w.flush()?;
            } else {
                print!("{}", adapt_csv_string(&out.trace));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(args) => {
            let kind = OracleKind::parse(&args.kind)?;
            let curve = oracle_curve(kind, &args.snr);
            if let Some(path) = &args.out {
                let mut w = BufWriter::new(File::create(path)?);
                write_oracle_csv(&curve, &mut w)?;
                w.flush()?;
            } else {
                write_output(None, &oracle_csv_string(&curve))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
