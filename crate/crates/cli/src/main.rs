mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tailsitter::alloc_probe::CountingAlloc;

use config::RunConfig;
use error::CliError;

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

/// Tail-sitter force-estimation pipeline.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key=value configuration file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    /// Primary output file of the command
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    weights_f1: Option<PathBuf>,
    #[arg(long, global = true)]
    weights_f2: Option<PathBuf>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Coefficient table CSV (alpha_deg,cl,cd)
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Dataset CSV read by train and eval
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Fly the mission with all-zero estimators
    #[arg(long, global = true)]
    zero_nets: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample and label a training set
    GenData,
    /// Train both estimators
    Train,
    /// Compare backprop against finite differences
    GradCheck,
    /// Fly the scripted mission and log a trace
    Simulate,
    /// Time the forward pass and check it does not allocate
    Bench,
    /// Write the active coefficient table
    DumpTable,
    /// Held-out RMSE of saved weights
    Eval,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = cli.lr {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = cli.dt {
        cfg.dt = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &cli.weights_f1 {
        cfg.weights_f1 = v.clone();
    }
    if let Some(v) = &cli.weights_f2 {
        cfg.weights_f2 = v.clone();
    }
    if let Some(v) = &cli.table {
        cfg.table = Some(v.clone());
    }
    if let Some(v) = &cli.data {
        cfg.dataset = v.clone();
    }
    cfg.zero_nets |= cli.zero_nets;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    match cli.command {
        Command::GenData => commands::gen_data(&cfg),
        Command::Train => commands::train_cmd(&cfg),
        Command::GradCheck => commands::grad_check(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Bench => commands::bench(&cfg),
        Command::DumpTable => commands::dump_table(&cfg),
        Command::Eval => commands::eval(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
