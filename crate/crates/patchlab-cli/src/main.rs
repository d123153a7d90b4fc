//! Batch front-end for the vortex-patch laboratory. Each command
//! validates its inputs fully before producing any output, writes
//! deterministic artifacts (identical scenario + seed means byte-identical
//! reports), and signals through the exit status: 0 when everything
//! passed, 1 on a check failure or an aborted run, 2 on usage or
//! configuration errors.

mod errors;
mod lemmas;
mod report;
mod scenario;
mod simulate;
mod table;
mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "patchlab",
    version,
    about = "Vortex-patch laboratory: scenario runs, check suites, lemma sweeps, plot-data export"
)]
struct Cli {
    /// Worker threads for batch evaluation (defaults to the core count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the scenario seed; also seeds the lemma sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; write checkpointed diagnostics and trajectories.
    Simulate {
        /// Scenario file (flat `key = value` lines).
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for the run artifacts.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named check suite against a scenario's model.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Suite name: stationary | identities.
        #[arg(long)]
        suite: String,
    },
    /// Check the standalone numerical lemmas at a sampling budget.
    Lemmas {
        /// Ensemble size for the random sweeps; 0 checks nothing.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
    /// Distill simulate artifacts into plot-ready tables.
    Report {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory holding the simulate artifacts; reports land beside them.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            std::process::exit(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate { scenario, out } => simulate::run(scenario, out, cli.seed),
        Command::Verify { scenario, suite } => verify::run(scenario, suite),
        Command::Lemmas { budget } => lemmas::run(*budget, cli.seed.unwrap_or(0)),
        Command::Report { scenario, out } => report::run(scenario, out),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
