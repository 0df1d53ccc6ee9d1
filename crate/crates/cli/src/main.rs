//! Command-line front end: key-rate curves, proof verification suites,
//! Fock-space oracle checks, and Monte-Carlo protocol runs.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on
//! configuration or I/O errors.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::CommandOutput;
use config::{BackendChoice, RunConfig};
use output::OutFormat;

#[derive(Parser)]
#[command(name = "dpskit", version, about = "Security analysis toolkit for differential-phase-shift QKD with imperfect interferometers")]
struct Cli {
    /// JSON configuration file; defaults cover every field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the RNG seed of seeded subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; each subcommand has a natural default.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized secret-key rate versus channel transmission, per half-width.
    KeyrateCurve {
        /// Overrides the sample bit-error rate of the rate model.
        #[arg(long)]
        e_bit: Option<f64>,
        /// Overrides the number of transmission grid points.
        #[arg(long)]
        eta_points: Option<usize>,
    },
    /// Numerical certification of the operator inequalities of the analysis.
    Verify,
    /// Fock-space oracle checks of the measurement model.
    FockCheck {
        /// Overrides the photon-number cutoff (at most 6).
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Monte-Carlo run of the full protocol with key-length evaluation.
    Simulate {
        /// Overrides the number of emitted blocks.
        #[arg(long)]
        n_em: Option<u64>,
        /// Overrides the per-pulse mean photon number.
        #[arg(long)]
        mu: Option<f64>,
        /// Overrides the detector backend.
        #[arg(long, value_enum)]
        backend: Option<BackendChoice>,
    },
}

fn run(cli: Cli) -> Result<CommandOutput> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let format = |natural: OutFormat| cli.format.unwrap_or(natural);
    match cli.command {
        Command::KeyrateCurve { e_bit, eta_points } => {
            let mut section = cfg.keyrate_curve;
            if let Some(e) = e_bit {
                section.e_bit = e;
            }
            if let Some(n) = eta_points {
                section.eta_points = n;
            }
            commands::cmd_keyrate_curve(&section, format(OutFormat::Csv))
        }
        Command::Verify => commands::cmd_verify(&cfg.verify, format(OutFormat::Json)),
        Command::FockCheck { n_max } => {
            let mut section = cfg.fock_check;
            if let Some(n) = n_max {
                section.n_max = n;
            }
            if let Some(seed) = cli.seed {
                section.seed = seed;
            }
            commands::cmd_fock_check(&section, format(OutFormat::Json))
        }
        Command::Simulate { n_em, mu, backend } => {
            let mut section = cfg.simulate;
            if let Some(n) = n_em {
                section.n_em = n;
            }
            if let Some(m) = mu {
                section.mu = m;
            }
            if let Some(b) = backend {
                section.backend = b;
            }
            if let Some(seed) = cli.seed {
                section.seed = seed;
            }
            commands::cmd_simulate(&section, format(OutFormat::Json))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(CommandOutput { exit_code, text }) => {
            let write_result = match &out_path {
                Some(path) => fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = write_result {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
