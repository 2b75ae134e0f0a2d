use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mbus_cli::{list_experiments, resolve_config, run, RunOptions, EXIT_USAGE};

/// Reproduces the Majorana quantum-bus results as CSV tables with a manifest and verdict.
#[derive(Parser, Debug)]
#[command(name = "mbus", version)]
struct Cli {
    /// Experiment id (see --list).
    #[arg(long, short = 'e')]
    experiment: Option<String>,
    /// Flat TOML file, or a previous manifest.json, overriding the defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: results/<experiment>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed for disorder draws.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for independent grid points.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Treat convergence warnings as failures.
    #[arg(long)]
    strict: bool,
    /// List experiments and exit.
    #[arg(long)]
    list: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    show_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        print!("{}", list_experiments());
        return ExitCode::SUCCESS;
    }
    let opts = RunOptions {
        experiment: cli.experiment.clone().unwrap_or_default(),
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        workers: cli.workers,
        sets: cli.sets,
        strict: cli.strict,
    };
    if cli.show_config {
        return match resolve_config(&opts) {
            Ok(cfg) => {
                print!("{}", cfg.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("mbus: {e}");
                ExitCode::from(EXIT_USAGE as u8)
            }
        };
    }
    if cli.experiment.is_none() {
        eprintln!("mbus: --experiment is required (see --list)");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    match run(&opts) {
        Ok(report) => {
            print!("{}", std::fs::read_to_string(report.out_dir.join("verdict.txt")).unwrap_or_default());
            eprintln!("wrote {} files to {} in {:.1} s", report.files.len(), report.out_dir.display(), report.wall_time_s);
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("mbus: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
