mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::run::{run, RunArgs};

#[derive(Parser)]
#[command(name = "janossy-kit", version, about = "Correlation and Janossy kernels of multi-floor determinantal ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random models and verify suites (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Brute-force evaluation budget (overrides tolerances.budget).
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        out,
        seed,
        threads,
        budget,
    } = cli.command;
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let args = RunArgs {
        config,
        out,
        seed,
        threads,
        budget,
    };
    match run(&args) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: tolerance violated");
                ExitCode::from(1)
            }
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
