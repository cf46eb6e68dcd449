//! Command-line front end: train a policy, evaluate a checkpoint, or turn a
//! metrics file into plot-ready series.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use lanechange_core::config::AppConfig;
use lanechange_core::harness::{
    emit_plot_data, evaluate, train, EvalSettings, RunSummary, TrainSettings,
};

#[derive(Parser)]
#[command(name = "lanechange", version, about = "Highway lane-change agent: training, evaluation, and plotting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write checkpoint, metrics, and summary.
    Train(TrainArgs),
    /// Evaluate a checkpoint greedily over fresh episodes.
    Eval(EvalArgs),
    /// Convert a metrics file into two-column series files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for checkpoint.bin, metrics.csv, and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; all randomness in the run derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the configured number of training episodes.
    #[arg(long)]
    episodes: Option<u32>,
    /// Let proposed lane changes through without the trajectory check.
    #[arg(long)]
    no_filter: bool,
    /// Continue from an existing checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Write a JSONL trace file per episode.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Number of evaluation episodes.
    #[arg(long)]
    episodes: u32,
    /// Let proposed lane changes through without the trajectory check.
    #[arg(long)]
    no_filter: bool,
    /// Master seed for the evaluation episode stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for metrics.csv and summary.json; nothing is written
    /// when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSONL trace file per episode (requires --out).
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Metrics file produced by train or eval.
    #[arg(long)]
    metrics: PathBuf,
    /// Directory for the series files.
    #[arg(long)]
    out: PathBuf,
}

fn print_summary(summary: &RunSummary) {
    println!(
        "{}: {} episodes, {:.2} mph, {:.2} lane changes, safety rate {:.2}",
        summary.method,
        summary.episodes,
        summary.avg_speed_mph,
        summary.avg_lane_changes,
        summary.safety_rate
    );
}

fn run_train(args: &TrainArgs) -> anyhow::Result<()> {
    let cfg = AppConfig::load(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))?;
    let outcome = train(&TrainSettings {
        cfg: &cfg,
        out_dir: &args.out,
        seed: args.seed,
        episodes: args.episodes,
        filter_enabled: !args.no_filter,
        resume_from: args.resume.as_deref(),
        trace: args.trace,
    })?;
    println!("checkpoint written to {}", outcome.checkpoint.display());
    println!("metrics written to {}", outcome.metrics.display());
    if let Some(summary) = &outcome.summary {
        print_summary(summary);
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let cfg = match &args.config {
        Some(path) => AppConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => AppConfig::default(),
    };
    let (summary, _) = evaluate(&EvalSettings {
        cfg: &cfg,
        checkpoint: &args.checkpoint,
        episodes: args.episodes,
        filter_enabled: !args.no_filter,
        seed: args.seed,
        out_dir: args.out.as_deref(),
        trace: args.trace,
    })?;
    print_summary(&summary);
    Ok(())
}

fn run_plot(args: &PlotArgs) -> anyhow::Result<()> {
    let files = emit_plot_data(&args.metrics, &args.out)?;
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Train(args) => run_train(&args),
        Command::Eval(args) => run_eval(&args),
        Command::Plot(args) => run_plot(&args),
    }
}
