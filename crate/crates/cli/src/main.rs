//! Command-line surface of the reranker scaling-law laboratory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rankscale::config::RunConfig;
use rankscale::pipeline::{self, ScalingAxis};
use rankscale::report;
use rankscale_core::ledger::Objective;
use rankscale_core::metrics::MetricName;

#[derive(Parser)]
#[command(
    name = "rankscale",
    about = "Train reranker families on a synthetic benchmark, measure ranking metrics, \
             fit saturating power laws, and validate forecasts on held-out observations",
    version
)]
struct Cli {
    /// Run configuration file (key = value sections; see README).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override; derives both the benchmark and sweep seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic benchmark (corpus, queries, qrels).
    Synth,
    /// Build the BM25 index and write first-stage runs.
    Index,
    /// Train the (objective x size) grid and append ledger records.
    Sweep,
    /// Re-evaluate stored checkpoints (requires save_checkpoints = true).
    Eval,
    /// Fit one power law to a ledger slice and print the parameters.
    Fit {
        /// Scaling axis: model, data, or joint.
        #[arg(long)]
        axis: String,
        /// Objective: pointwise, pairwise, or listwise.
        #[arg(long)]
        objective: String,
        /// Metric: ndcg@10, map, mrr, or ce.
        #[arg(long, default_value = "ndcg@10")]
        metric: String,
        /// Model size (param count) for the data axis; defaults to the
        /// configured data_size_index.
        #[arg(long)]
        size: Option<u64>,
    },
    /// Run the three forecast protocols for every objective.
    Forecast {
        /// Metric to forecast.
        #[arg(long, default_value = "ndcg@10")]
        metric: String,
    },
    /// Emit forecast tables (with bundled reference values) and curve CSVs.
    Report,
}

fn load_config(cli: &Cli) -> rankscale::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> rankscale::Result<()> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Synth => pipeline::cmd_synth(&config),
        Command::Index => pipeline::cmd_index(&config),
        Command::Sweep => pipeline::cmd_sweep(&config).map(|_| ()),
        Command::Eval => pipeline::cmd_eval(&config),
        Command::Fit { axis, objective, metric, size } => {
            let axis: ScalingAxis = axis.parse()?;
            let objective: Objective = objective.parse().map_err(rankscale::Error::Core)?;
            let metric: MetricName = metric.parse().map_err(rankscale::Error::Core)?;
            let text = pipeline::cmd_fit(&config, axis, objective, metric, *size)?;
            print!("{text}");
            Ok(())
        }
        Command::Forecast { metric } => {
            let metric: MetricName = metric.parse().map_err(rankscale::Error::Core)?;
            pipeline::cmd_forecast(&config, metric).map(|_| ())
        }
        Command::Report => report::cmd_report(&config),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors by itself.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
