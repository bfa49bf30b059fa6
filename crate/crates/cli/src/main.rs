use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod report;

#[derive(Parser)]
#[command(
    name = "fadeopt",
    version,
    about = "Multi-agent DQN optimizer for discrete process-parameter grids"
)]
struct Cli {
    /// Suppress progress and result printing.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Nsga2,
    Mopso,
}

#[derive(Subcommand)]
enum Command {
    /// Train the agent ensemble and write log.csv, best.json and checkpoint.json.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the synthetic model on random grid states and write a dataset CSV.
    SimulateData {
        #[command(flatten)]
        common: Common,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 129)]
        count: usize,
        /// Standard deviation of Gaussian noise added to every output.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Run NSGA-II or MOPSO with the configured budget.
    Baseline {
        algorithm: Algorithm,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the best solutions of finished runs.
    Compare {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively search the grid for the minimum summed error.
    BruteForce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match cli.command {
        Command::Train { common, out } => commands::train(&common, &out, quiet),
        Command::SimulateData {
            common,
            out,
            count,
            noise,
        } => commands::simulate_data(&common, &out, count, noise, quiet),
        Command::Baseline {
            algorithm,
            common,
            out,
        } => commands::baseline(algorithm, &common, &out, quiet),
        Command::Compare { runs, out } => commands::compare(&runs, out.as_deref(), quiet),
        Command::BruteForce { common, out } => {
            commands::brute_force(&common, out.as_deref(), quiet)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}")
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("fadeopt: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
