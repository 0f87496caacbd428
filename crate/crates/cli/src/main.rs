//! Scenario runner CLI.
//!
//! Exit codes: 0 on success, 1 on configuration/usage errors, 2 on runtime
//! failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vtsim_core::error::Error;
use vtsim_core::output::{
    summary_table, write_metrics_csv, write_run_outputs,
};
use vtsim_core::scenario::{
    load_config, run_compare, run_scenario, Architecture, RunOutput, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "vtsim",
    about = "Correlator-level GNSS receiver simulation: scalar tracking vs VDFLL",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one architecture (or all three) against a scenario.
    Run(RunArgs),
    /// Run all three architectures with common random numbers and emit a
    /// joint report.
    Compare(CompareArgs),
    /// Validate a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// scalar1hz | scalar50hz | vdfll | all
    #[arg(long)]
    arch: String,
    /// Overrides the seed from the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plots: bool,
}

fn write_outputs(
    out: &Path,
    cfg: &ScenarioConfig,
    runs: &[RunOutput],
    plots: bool,
) -> Result<(), Error> {
    let schedule = cfg.schedule()?;
    let affected = schedule.affected_prns();
    let reports: Vec<_> = runs.iter().map(|r| &r.metrics).collect();
    write_metrics_csv(&out.join("metrics.csv"), &reports)?;
    for run in runs {
        write_run_outputs(out, run, plots, &affected)?;
    }
    print!("{}", summary_table(&reports));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { config } => {
            load_config(&config)?;
            println!("{} is valid", config.display());
            Ok(())
        }
        Command::Run(args) => {
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let runs = if args.arch == "all" {
                run_compare(&cfg)?
            } else {
                let arch = Architecture::parse(&args.arch).ok_or_else(|| {
                    Error::config(format!(
                        "unknown architecture {:?} (expected scalar1hz, scalar50hz, vdfll or all)",
                        args.arch
                    ))
                })?;
                vec![run_scenario(&cfg, arch)?]
            };
            write_outputs(&args.out, &cfg, &runs, args.plots)
        }
        Command::Compare(args) => {
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let runs = run_compare(&cfg)?;
            write_outputs(&args.out, &cfg, &runs, args.plots)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::Parse { .. } | Error::UnknownChannel { .. })) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(2)
        }
    }
}
