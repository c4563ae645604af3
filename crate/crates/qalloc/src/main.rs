use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qalloc::commands::{cmd_allocate, cmd_estimate, cmd_mse, cmd_random, cmd_report, Run};
use qalloc::config::RunConfig;
use qalloc::Result;

/// Quantile frontier estimation and resource-allocation runs.
#[derive(Parser, Debug)]
#[command(name = "qalloc", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(short, long, global = true, default_value = "qalloc.json")]
    config: PathBuf,
    /// Output directory, overriding the configuration.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for random allocation, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver backend (builtin or microlp), overriding the configuration.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// More log output; repeat for more.
    #[arg(short, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Add wall-clock columns. Outputs are then no longer byte-identical
    /// between runs.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Fit the quantile frontiers and the envelope.
    Estimate,
    /// Solve the configured allocation scenarios on the fitted frontiers.
    Allocate,
    /// Simulate random within-group allocations.
    Random,
    /// Out-of-sample prediction errors over consecutive periods.
    Mse,
    /// Bar-chart data and marginal products from earlier outputs.
    Report,
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.random.seed = s;
    }
    if let Some(s) = &cli.solver {
        cfg.solver = s.clone();
    }
    cfg.validate()?;
    let run = Run::new(cfg, cli.timings)?;
    let written = match cli.command {
        Command::Estimate => cmd_estimate(&run)?,
        Command::Allocate => cmd_allocate(&run)?,
        Command::Random => cmd_random(&run)?,
        Command::Mse => cmd_mse(&run)?,
        Command::Report => cmd_report(&run)?,
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
