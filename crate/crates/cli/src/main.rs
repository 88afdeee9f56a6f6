//! `lnakit` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O.

mod commands;
mod config;
mod error;
mod output;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lnakit::rf::NfVariant;

use config::RunConfig;
use error::CliResult;
use output::{Format, Writer};

#[derive(Parser)]
#[command(name = "lnakit", version, about = "Low-noise amplifier analysis toolkit")]
struct Cli {
    /// TOML or JSON config; a JSON or CSV artifact from an earlier run also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides `analysis.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `optimizer.variant`.
    #[arg(long, global = true)]
    variant: Option<NfVariant>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transconductance fluctuation over the (g_m1, g_m2) grid.
    QuantumSweep,
    /// Mismatch noise figure over the source reflection disk, both variants.
    NfMap,
    /// Rollett K, Δ and μ across the band.
    Stability,
    /// Two-tone intermodulation and compression tables.
    TwoTone,
    /// Simulated SNR-degradation noise figure measurement.
    SnrSim,
    /// Source-match optimisation over the band.
    Optimize,
    /// Noise figure and noise temperature conversion table.
    Convert {
        /// Noise figures [dB], comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        nf_db: Vec<f64>,
        /// Noise temperatures [K], comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t_e: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::QuantumSweep => "quantum-sweep",
            Command::NfMap => "nf-map",
            Command::Stability => "stability",
            Command::TwoTone => "two-tone",
            Command::SnrSim => "snr-sim",
            Command::Optimize => "optimize",
            Command::Convert { .. } => "convert",
        }
    }
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let cwd = PathBuf::from(".");
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default().resolve(&cwd)?,
    };
    if let Some(s) = cli.seed {
        cfg.analysis.seed = Some(s);
    }
    if let Some(v) = cli.variant {
        cfg.optimizer.variant = Some(v);
    }
    if let Command::Convert { nf_db, t_e } = &cli.command {
        if !nf_db.is_empty() || !t_e.is_empty() {
            cfg.convert.nf_db = Some(nf_db.clone());
            cfg.convert.t_e_k = Some(t_e.clone());
        }
    }
    let w = Writer {
        dir: &cli.out_dir,
        command: cli.command.name(),
        config: &cfg,
    };
    let f = cli.format;
    match cli.command {
        Command::QuantumSweep => commands::quantum_sweep(&cfg, &w, f),
        Command::NfMap => commands::nf_map(&cfg, &w, f),
        Command::Stability => commands::stability(&cfg, &w, f),
        Command::TwoTone => commands::two_tone(&cfg, &w, f),
        Command::SnrSim => commands::snr_sim(&cfg, &w, f),
        Command::Optimize => commands::optimize(&cfg, &w, f),
        Command::Convert { .. } => commands::convert(&cfg, &w, f),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lnakit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

