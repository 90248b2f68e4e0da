//! Command-line experiment runner: seeded strategy sweeps, the latency
//! heterogeneity study, indicator recomputation and paired comparisons.
//!
//! Exit statuses: 0 success, 2 configuration error, 3 runtime error.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_compare, cmd_metrics, cmd_run, cmd_study, Alternative, CompareOptions, Metric, MetricsOptions,
    RunOptions, StudyOptions,
};
pub use config::{ExperimentConfig, StudyFile, SCHEMA_VERSION};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hetmo", version, about = "Multiobjective optimization under heterogeneous objective latencies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured strategy for every seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run this seed only.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Pairwise latency-difference study over Beta-distributed latencies.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired one-sided Wilcoxon signed-rank test on a summary CSV.
    Compare {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value = "hv")]
        metric: Metric,
        /// Defaults to the metric's direction of improvement.
        #[arg(long, value_enum)]
        alternative: Option<Alternative>,
    },
    /// Recompute indicators and attainment surfaces from stored run files.
    Metrics {
        #[arg(long)]
        out: PathBuf,
        /// Experiment config supplying a fixed reference point.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
    },
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            jobs,
        } => {
            let o = cmd_run(&RunOptions {
                config,
                seed,
                out,
                jobs,
            })?;
            Ok(format!("{} runs written to {}", o.rows.len(), o.dir.display()))
        }
        Command::Study { config, seed, out } => {
            let o = cmd_study(&StudyOptions { config, seed, out })?;
            Ok(format!("{} cells written to {}", o.result.cells.len(), o.path.display()))
        }
        Command::Compare {
            summary,
            a,
            b,
            metric,
            alternative,
        } => {
            let report = cmd_compare(&CompareOptions {
                summary,
                a,
                b,
                metric,
                alternative,
            })?;
            Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Command::Metrics { out, config, level } => {
            let o = cmd_metrics(&MetricsOptions { out, config, level })?;
            Ok(format!(
                "{} runs rescored, reference point {:?}",
                o.rows.len(),
                o.reference_point
            ))
        }
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
