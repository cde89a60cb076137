//! Operator entry point: dataset synthesis, index build, profiling,
//! planning, splitting, serving, simulation sweeps, and reporting.

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tivf",
    about = "Tiered IVF vector retrieval: offline construction, hybrid serving, and SLO simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a Gaussian-mixture dataset plus calibration/test queries
    GenData(commands::gen_data::Args),
    /// Train an IVF index from a dataset file
    BuildIndex(commands::build_index::Args),
    /// Profile cluster-access skew, hit-rate variance, and batch latency
    Profile(commands::profile::Args),
    /// Run latency-bounded partitioning and emit plan + scenario files
    Plan(commands::plan::Args),
    /// Materialize a plan into shard files and mapping tables
    Split(commands::split::Args),
    /// Serve line-delimited JSON requests over stdin/stdout
    Serve(commands::serve::Args),
    /// Run simulation sweeps over arrival rates and placement modes
    Simulate(commands::simulate::Args),
    /// Render plots and a summary from a sweep directory
    Report(commands::report::Args),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(args) => commands::gen_data::run(args),
        Command::BuildIndex(args) => commands::build_index::run(args),
        Command::Profile(args) => commands::profile::run(args),
        Command::Plan(args) => commands::plan::run(args),
        Command::Split(args) => commands::split::run(args),
        Command::Serve(args) => commands::serve::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    if let Err(e) = result {
        eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
        std::process::exit(1);
    }
}
