//! `spde-lab <subcommand> --config <path> [--out <dir>] [--seed <u64>]`
//!
//! Subcommands mirror the experiment kinds; the subcommand must match the
//! `kind` field of the config file. Exit codes: 0 success, 2 config parse
//! error, 3 config invariant violation, 4 I/O failure.
//!
//! `SPDE_LAB_THREADS` caps the worker count (default: all cores).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spde_lab_cli::config::{ExperimentConfig, ExperimentKind};
use spde_lab_cli::{run_experiment, RunError};

#[derive(Parser)]
#[command(name = "spde-lab", version, about = "Euler-scheme divergence laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV artifacts and the metadata sidecar.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Moment sweep over a list of resolutions.
    Sweep(CommonArgs),
    /// Single-resolution run, optionally dumping one trajectory.
    Simulate(CommonArgs),
    /// Divergence lower bounds with constant audit columns.
    Bounds(CommonArgs),
    /// Per-mode variance check against the zero-drift closed form.
    ValidateOu(CommonArgs),
    /// Interval/ball/smoothed bound validity against references.
    ValidateGaussianBounds(CommonArgs),
    /// Product-bound validity on the 1-D cubic-drift toy.
    ValidateAbstractBound(CommonArgs),
    /// 1-D Euler–Maruyama moment sweep.
    Sode1dSweep(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Sweep(_) => ExperimentKind::Sweep,
            Command::Simulate(_) => ExperimentKind::Simulate,
            Command::Bounds(_) => ExperimentKind::Bounds,
            Command::ValidateOu(_) => ExperimentKind::ValidateOu,
            Command::ValidateGaussianBounds(_) => ExperimentKind::ValidateGaussianBounds,
            Command::ValidateAbstractBound(_) => ExperimentKind::ValidateAbstractBound,
            Command::Sode1dSweep(_) => ExperimentKind::Sode1dSweep,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Sweep(a)
            | Command::Simulate(a)
            | Command::Bounds(a)
            | Command::ValidateOu(a)
            | Command::ValidateGaussianBounds(a)
            | Command::ValidateAbstractBound(a)
            | Command::Sode1dSweep(a) => a,
        }
    }
}

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(threads) = std::env::var("SPDE_LAB_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: SPDE_LAB_THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(EXIT_INVALID);
            }
        }
    }

    let args = cli.command.args();
    let raw = match std::fs::read_to_string(&args.config) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let mut cfg = match ExperimentConfig::from_toml(&raw) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if cfg.kind != cli.command.kind() {
        eprintln!(
            "error: config kind '{}' does not match subcommand '{}'",
            cfg.kind.as_str(),
            cli.command.kind().as_str()
        );
        return ExitCode::from(EXIT_INVALID);
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID);
    }

    match run_experiment(&cfg, &raw, &args.out) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Io(e)) => {
            eprintln!("error: I/O failure: {e}");
            ExitCode::from(EXIT_IO)
        }
        Err(RunError::Experiment(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
