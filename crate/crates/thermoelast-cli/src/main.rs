//! Command-line front end: configuration-driven experiments with CSV and
//! JSON artifacts. Exit codes: 0 on success, 2 when a check fails, 1 on
//! configuration or usage errors.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::Config;

#[derive(Parser)]
#[command(
    name = "thermoelast",
    version,
    about = "Simulate and verify coupled wave/heat systems with Cattaneo and Fourier conduction"
)]
struct Cli {
    /// TOML configuration file; defaults are used when omitted
    #[arg(long, global = true)]
    config: Option<String>,

    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<String>,

    /// RNG seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a config key, repeatable: --set dt=1e-4 --set beta_grid.points=40
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured system and write the energy trace
    Simulate,
    /// Compute the full spectrum with residual certificates
    Spectrum,
    /// Scan the weighted resolvent norm along the imaginary axis
    Resolvent,
    /// Observability Gramian, constants, and the eigenfamily lower bound
    Observability,
    /// Decay-rate fits on a damped energy trace
    Decay,
    /// Run the whole verification suite
    Verify,
}

fn run() -> Result<bool, String> {
    let cli = Cli::try_parse().map_err(|e| {
        // help/version are not errors
        if e.kind() == clap::error::ErrorKind::DisplayHelp
            || e.kind() == clap::error::ErrorKind::DisplayVersion
        {
            print!("{e}");
            std::process::exit(0);
        }
        e.to_string()
    })?;
    let mut overrides = cli.sets.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let config = Config::load(cli.config.as_deref(), &overrides)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&config, out),
        Command::Spectrum => commands::cmd_spectrum(&config, out),
        Command::Resolvent => commands::cmd_resolvent(&config, out),
        Command::Observability => commands::cmd_observability(&config, out),
        Command::Decay => commands::cmd_decay(&config, out),
        Command::Verify => commands::cmd_verify(&config, out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(2)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
