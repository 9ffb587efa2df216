//! Batch front-end: runs one mode against a config (or preset) and writes
//! deterministic CSV artifacts plus a JSON manifest, or compares two
//! artifacts from earlier runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imt::config::{self, Config};
use imt::run::{self, Mode};

#[derive(Parser)]
#[command(name = "imt", version, about = "Dark-state polariton mass-trap toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one mode and write artifacts to the output directory.
    Run(RunArgs),
    /// Compare two CSV artifacts (overlap and relative error).
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// One of: potentials, analytic-sweep, eigen, evolve-dsp, evolve-obe,
    /// landscape, groundstate, oscillation, splitting.
    #[arg(long)]
    mode: Mode,
    /// TOML config path (see configs/ for examples). Either this or --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter preset: landscape, groundstate, oscillation, or splitting.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parameter sweeps.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Config overrides, dotted key paths: e.g. "physics.delta_p=2.0 Gamma".
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load_config(args: &RunArgs) -> Result<Config, Box<dyn std::error::Error>> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => Config::from_path(path)?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => config::preset("landscape")?,
        (Some(_), Some(_)) => return Err("--config and --preset are mutually exclusive".into()),
    };
    for ov in &args.overrides {
        cfg.apply_override(ov)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), Box<dyn std::error::Error>> = match cli.command {
        Command::Run(args) => (|| {
            let cfg = load_config(&args)?;
            let manifest = run::run(args.mode, &cfg, &args.out, args.workers)?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
            Ok(())
        })(),
        Command::Compare { run_a, run_b } => (|| {
            let report = run::compare(&run_a, &run_b)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // machine-readable error record on stderr
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::FAILURE
        }
    }
}
