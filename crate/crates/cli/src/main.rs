// SPDX-License-Identifier: Apache-2.0

//! `dss`: fit a posterior, distill it into sparse summaries, draw the plots.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

#[derive(Parser, Debug)]
#[command(name = "dss", version, about = "Decoupled shrinkage and selection for Bayesian regression posteriors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample or enumerate a posterior and write draws.csv (plus models.csv).
    Fit(FitArgs),
    /// Solve the sparsification path and write path.csv, summary.csv, report.txt.
    Summarize(SummarizeArgs),
    /// Render rho.svg, psi.svg and coef.svg from the summary CSVs.
    Plot(PlotArgs),
    /// Print the model picked by the interval heuristic.
    Select(SelectArgs),
    /// Logistic sparsification path from draws with an intercept.
    GlmSummarize(GlmArgs),
    /// Sparse precision-matrix path from a covariance posterior.
    GraphSummarize(GraphArgs),
    /// Write export.json with the selection, inclusion probabilities, HPM and MPM.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response column (defaults to the last column).
    #[arg(long)]
    pub response: Option<String>,
    /// Columns to log-transform at load time.
    #[arg(long, value_delimiter = ',')]
    pub log: Vec<String>,
    /// Keep the raw scale instead of standardizing.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Horseshoe,
    Gprior,
    HyperG,
    Logistic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelPriorKind {
    Uniform,
    BetaBinomial,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalKind {
    Unit,
    Noise,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "horseshoe")]
    pub prior: PriorKind,
    /// Fixed g: a number, or `n` for the sample size.
    #[arg(long, default_value = "n")]
    pub g: String,
    /// Hyper-g preset: cui, liang, liang-n (robust), maruyama-george (mg).
    #[arg(long, default_value = "liang-n")]
    pub preset: String,
    #[arg(long, value_enum, default_value = "beta-binomial")]
    pub model_prior: ModelPriorKind,
    /// Largest admissible model size.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Enumerate all models (the default when neither mode is given).
    #[arg(long, conflicts_with = "gibbs_sweeps")]
    pub enumerate: bool,
    /// Search the model space with this many Gibbs sweeps.
    #[arg(long)]
    pub gibbs_sweeps: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Horseshoe global scale: unit, or noise (scaled by sigma).
    #[arg(long, value_enum, default_value = "unit")]
    pub global: GlobalKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Adaptive weights `w = E(β)`.
    Mean,
    /// Plain lasso weights `w = 1`.
    Uniform,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Draws CSV (defaults to OUT/draws.csv).
    #[arg(long)]
    pub draws: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mean")]
    pub weights: WeightKind,
    /// Raw-scale prediction points replacing the observed design.
    #[arg(long, conflicts_with = "augment")]
    pub design: Option<PathBuf>,
    /// Raw-scale prediction points appended to the observed design.
    #[arg(long)]
    pub augment: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    pub level: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GlmArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub draws: Option<PathBuf>,
    /// Number of penalty values on the log-spaced grid.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// Smallest grid value as a fraction of the largest.
    #[arg(long, default_value_t = 1e-3)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0.9)]
    pub level: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Numeric CSV; every column is a variable.
    #[arg(long, conflicts_with = "sigma")]
    pub data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub log: Vec<String>,
    /// Posterior mean covariance as a `name,...` matrix CSV.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn configure_threads() {
    let Ok(v) = std::env::var("DSS_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                error!("could not size the worker pool: {e}");
            }
        }
        _ => error!("ignoring DSS_THREADS={v:?}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let res = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Summarize(a) => commands::summarize(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::Select(a) => commands::select(&a),
        Command::GlmSummarize(a) => commands::glm_summarize(&a),
        Command::GraphSummarize(a) => commands::graph_summarize(&a),
        Command::Export(a) => commands::export(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
