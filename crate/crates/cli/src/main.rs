use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use ttvqe::tfim;
use ttvqe_cli::{run_experiment, selftest, timing, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "ttvqe",
    version,
    about = "VQE sweeps for the transverse-field Ising chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write results.csv and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads shared by cells and restarts.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; defaults to `output.dir`, then $TTVQE_OUT_DIR, then `results`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate wall times per (ansatz, layers, optimizer).
    Timing {
        #[arg(long)]
        results: PathBuf,
    },
    /// Print the exact ground energy of the open chain.
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, jobs, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&cfg, &RunOptions { jobs, out })?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!("{} rows, {} failed", summary.rows.len(), summary.failures);
            for r in summary.rows.iter().filter(|r| r.failed()) {
                eprintln!(
                    "failed: n={} {} L={} {} seed={}: {}",
                    r.n,
                    r.ansatz,
                    r.layers,
                    r.optimizer,
                    r.seed,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Timing { results } => {
            print!("{}", timing::render(&timing::timing_report(&results)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Exact { n, h } => {
            let e = match ttvqe::pauli::tfim_fixture(n, h) {
                Some(e) => e,
                None => tfim(n, h)?.ground_energy()?,
            };
            println!("{e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let mut failed = 0;
            for c in selftest::run() {
                match c.outcome {
                    Ok(()) => println!("PASS {}", c.name),
                    Err(e) => {
                        failed += 1;
                        println!("FAIL {}: {e:#}", c.name);
                    }
                }
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
