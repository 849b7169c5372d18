//! `anyonsim`: spectra, topology and circuit runs for two interacting anyons.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
//! failure (ambiguous parity, closed gap, singular system), 1 I/O error.

mod commands;
mod config;
mod error;
mod svg;

use clap::{Args, Parser, Subcommand};
use commands::Figure;
use config::{RunConfig, SweepSpec};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anyonsim", version, about = "Two-anyon doublon topology and its circuit emulation")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags applied on top of the config file.
#[derive(Args, Default)]
struct Overrides {
    /// JSON run configuration; defaults are used for absent keys.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n_sites: Option<usize>,
    /// Statistical angle in radians.
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    u: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    corner_shift: Option<bool>,
    /// Number of θ points in the sweep.
    #[arg(long, global = true)]
    sweep_count: Option<usize>,
    /// Circuit synthesis mode (ideal or physical).
    #[arg(long, global = true)]
    mode: Option<anyon::circuit::SynthesisMode>,
    #[arg(long, global = true)]
    paper_replica: Option<bool>,
    /// Inductor quality factor.
    #[arg(long, global = true)]
    q: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Physical spectrum, classification and |β|² maps at one θ.
    Spectrum,
    /// IPR(ε, θ) map and doublon gap over the θ sweep.
    IprMap,
    /// Zak phase of the upper doublon band at the configured θ.
    Zak,
    /// θ of the doublon-gap minimum.
    Transition,
    /// Netlist, SPICE deck, impedance spectra and maps.
    Circuit,
    /// Run a bundled figure configuration and write summary.json.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        if let Some(v) = self.n_sites {
            m.n_sites = v;
        }
        if let Some(v) = self.theta {
            m.theta = v;
        }
        if let Some(v) = self.u {
            m.u = v;
        }
        if let Some(v) = self.p {
            m.p = v;
        }
        if let Some(v) = self.corner_shift {
            m.corner_shift = v;
        }
        if let Some(count) = self.sweep_count {
            cfg.sweep = Some(SweepSpec { count, ..cfg.sweep.unwrap_or_default() });
        }
        if self.mode.is_some() || self.paper_replica.is_some() || self.q.is_some() {
            let c = cfg.circuit.get_or_insert_with(Default::default);
            if let Some(v) = self.mode {
                c.mode = v;
            }
            if let Some(v) = self.paper_replica {
                c.paper_replica = v;
            }
            if self.q.is_some() {
                c.q = self.q;
            }
        }
        if let Some(dir) = &self.out {
            cfg.outputs.dir = dir.clone();
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match (&cli.command, &cli.overrides.config) {
        (_, Some(path)) => RunConfig::load(path)?,
        (Command::Reproduce { figure }, None) => commands::bundled(*figure),
        _ => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::IprMap => commands::cmd_ipr_map(&cfg),
        Command::Zak => commands::cmd_zak(&cfg),
        Command::Transition => commands::cmd_transition(&cfg),
        Command::Circuit => commands::cmd_circuit(&cfg),
        Command::Reproduce { figure } => commands::reproduce(figure, &cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
