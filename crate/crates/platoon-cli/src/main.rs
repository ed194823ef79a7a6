use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use platoon_cli::commands;

/// Simulator and string-stability analyzer for CS, CTG, and hybrid
/// connected-vehicle platoons.
#[derive(Parser)]
#[command(name = "platoon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one platoon (or chain of platoons) through a scenario and write
    /// trace.csv and moe.csv.
    Simulate {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Scenario override: periodic, decel-accel, or custom:<csv-path>.
        #[arg(long)]
        scenario: Option<String>,
        /// Time step override (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every stability condition and write a JSON report.
    Stability {
        #[arg(long)]
        config: PathBuf,
        /// Output JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce the comparison tables: one CSV per measurement with rows
    /// (system, r) and columns over the platoon-size range.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the experiment grid.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Scan the hybrid stability verdict over two parameter axes and write a
    /// region CSV for heatmap plotting.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            config,
            scenario,
            dt,
            out,
        } => commands::cmd_simulate(config, scenario.as_deref(), *dt, out),
        Command::Stability { config, out } => commands::cmd_stability(config, out),
        Command::Compare { config, out, jobs } => commands::cmd_compare(config, out, *jobs),
        Command::Sweep { config, out } => commands::cmd_sweep(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
