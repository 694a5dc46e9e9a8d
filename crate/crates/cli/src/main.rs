//! Experiment driver for torus vortex dynamics.
//!
//! Subcommands: selftest | ode | sym | pde | compare | green. Experiments
//! are declared in JSON configs (schema-validated, unknown keys rejected);
//! flags cover only run-level switches. Exit codes: 0 ok, 1 check failure,
//! 2 config error, 3 runtime failure.

mod commands;
mod config;
mod manifest;
mod svg;

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "torus-vortex", version, about = "Quantized vortex dynamics on the unit torus")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the built-in invariant suite.
    Selftest {
        /// Reduced table sizes, finishes in seconds.
        #[arg(long)]
        quick: bool,
        /// Load/save the Green table cache at this path.
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
    /// Integrate the reduced vortex law from a JSON config.
    Ode {
        config: PathBuf,
        /// Override the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
    /// Integrate a symmetric scalar reduction (mode 2v or 4v).
    Sym {
        config: PathBuf,
        /// Also run the full system and report the max deviation.
        #[arg(long)]
        check_full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
    /// Solve the CGL equation from constructed initial data.
    Pde {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
    /// Sweep epsilon and compare tracked vortices against the reduced law.
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
    /// Build or inspect a Green-function table cache.
    Green {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        green_cache: Option<PathBuf>,
    },
}

/// Write via a temp file and rename so readers never observe partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("TORUS_VORTEX_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                torus_vortex::exec::set_threads(n);
            }
            _ => {
                eprintln!("TORUS_VORTEX_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Selftest { quick, green_cache } => commands::selftest::run(quick, green_cache.as_deref()),
        Cmd::Ode { config, out, green_cache } => {
            commands::ode::run(&config, out.as_deref(), green_cache.as_deref())
        }
        Cmd::Sym {
            config,
            check_full,
            out,
            green_cache,
        } => commands::sym::run(&config, check_full, out.as_deref(), green_cache.as_deref()),
        Cmd::Pde { config, out, green_cache } => {
            commands::pde::run(&config, out.as_deref(), green_cache.as_deref())
        }
        Cmd::Compare { config, out, green_cache } => {
            commands::compare::run(&config, out.as_deref(), green_cache.as_deref())
        }
        Cmd::Green { config, out, green_cache } => {
            commands::green::run(&config, out.as_deref(), green_cache.as_deref())
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            if e.is::<config::ConfigError>() {
                eprintln!("{e}");
                ExitCode::from(2)
            } else {
                eprintln!("runtime failure: {e}");
                ExitCode::from(3)
            }
        }
    }
}
