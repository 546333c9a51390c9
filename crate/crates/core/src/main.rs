use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sacbound::config::RunConfig;
use sacbound::report::{parse_streams, run_batch, run_single};
use sacbound::selftest;

#[derive(Parser)]
#[command(version, about = "Stochastic Allen-Cahn simulation with a-posteriori error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write timeseries.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate independent trajectories in parallel and write aggregate.json.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// A count `n` (streams 0..n) or a comma-separated list of streams.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in numerical checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => RunConfig::from_file(&config).and_then(|run| {
            let report = run_single(&run, &out)?;
            let s = &report.summary;
            println!(
                "m={} t={} Km={:.6} bound={:.6} (E1={:.6} E2={:.6} E3={:.6} E4={:.6} E5={:.6})",
                s.m, s.t, s.km, s.bound, s.e1, s.e2, s.e3, s.e4, s.e5
            );
            Ok(true)
        }),
        Command::Batch { config, seeds, out } => RunConfig::from_file(&config).and_then(|run| {
            let streams = parse_streams(&seeds)?;
            let (_, agg) = run_batch(&run, &streams, &out)?;
            for r in &agg.runs {
                println!("stream {:>4}: Km={:.6} bound={:.6}", r.stream, r.km, r.bound);
            }
            println!(
                "Km min/median/max = {:.6}/{:.6}/{:.6}; bound min/median/max = {:.6}/{:.6}/{:.6}",
                agg.km.min, agg.km.median, agg.km.max, agg.bound.min, agg.bound.median, agg.bound.max
            );
            Ok(true)
        }),
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{r}");
            }
            Ok(!results.iter().any(|r| r.is_unexpected_failure()))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
