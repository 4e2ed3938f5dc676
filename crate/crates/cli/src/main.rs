//! `modpso`: enumerate module configurations, run benchmark sweeps, analyse
//! module importance and cluster problem classes.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 internal invariant
//! violation.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modpso::cluster::{Linkage, Metric};
use modpso::FunctionId;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "modpso", version, about = "Modular PSO laboratory")]
struct Cli {
    /// Worker threads for sweeps and analysis; 0 uses all available cores.
    #[arg(long, global = true, env = "MODPSO_WORKERS", default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the configurations of a plan's design space.
    Enumerate(EnumerateArgs),
    /// Run the benchmark sweep and write one dataset per problem.
    Run(RunArgs),
    /// Decompose datasets into effect vectors, curves, marginals and summaries.
    Analyze(AnalyzeArgs),
    /// Cluster problem classes by their effect vectors.
    Cluster(ClusterArgs),
    /// Render analysis files as SVG.
    Plot(PlotArgs),
    /// Run every stage in order.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    /// Experiment plan (JSON).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Master seed, overriding the plan.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dimensions, comma separated, overriding the plan.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Problems such as `f1,f9`, overriding the plan.
    #[arg(long, value_delimiter = ',')]
    pub functions: Vec<FunctionId>,
    /// Runs per configuration and problem.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Evaluation budget per run, as a multiple of the dimension.
    #[arg(long = "budget-mult")]
    pub budget_mult: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Directory for `configs.txt` (or `configs.json`); stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisOptions {
    /// Highest interaction order in effect vectors.
    #[arg(long = "max-order", default_value_t = 3)]
    pub max_order: usize,
    /// Decompose the table itself instead of a forest surrogate; the dataset
    /// must be a complete factorial design over its observed levels.
    #[arg(long)]
    pub exact: bool,
    /// Seed of the surrogate forest.
    #[arg(long = "forest-seed", default_value_t = 0)]
    pub forest_seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Dataset files or directories containing them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisOptions,
}

#[derive(Args, Debug, Clone)]
pub struct ClusterOptions {
    /// Fix the number of clusters instead of searching.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub metric: Option<Metric>,
    #[arg(long)]
    pub linkage: Option<Linkage>,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// Effect-vector files or directories containing them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub cluster: ClusterOptions,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Summary, curve, marginal-table or dendrogram files, or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Run,
    Analyze,
    Cluster,
    Plot,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Stages to execute; they always run in pipeline order.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "run,analyze,cluster,plot")]
    pub stages: Vec<Stage>,
    #[command(flatten)]
    pub analysis: AnalysisOptions,
    #[command(flatten)]
    pub cluster: ClusterOptions,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.workers > 0 {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    match cli.command {
        Command::Enumerate(a) => commands::enumerate(&a),
        Command::Run(a) => commands::run(&a, cli.workers),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Cluster(a) => commands::cluster(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::Pipeline(a) => commands::pipeline(&a, cli.workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("modpso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("modpso: internal invariant violated (panic)");
            ExitCode::from(3)
        }
    }
}
