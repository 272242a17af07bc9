mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "sdpxlab", version, about = "Color refinement, PDHG and relaxation tooling for linear SDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded relaxation instance in SDPA sparse format.
    Gen(GenArgs),
    /// Solve an SDPA instance with PDHG.
    Solve(SolveArgs),
    /// Run a color refinement to its stable partition.
    Color(ColorArgs),
    /// Run a seeded network forward pass and optional property checks.
    NnForward(NnArgs),
    /// Run the counterexample and consistency suite.
    Verify(VerifyArgs),
    /// Time cold and warm-started solves over a size sweep.
    Bench(BenchArgs),
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub n: usize,
    /// Edge probability for Erdős–Rényi graphs.
    #[arg(long, conflicts_with = "d")]
    pub p: Option<f64>,
    /// Degree for random regular graphs.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Number of LMI direction constraints.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Run the regularization ladder and report the minimum-norm solution.
    #[arg(long)]
    pub min_norm: bool,
    /// JSON file with `X` (and optionally `y`) to start from.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ColorArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct NnArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub arch: String,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = ["equivariance", "symmetry", "coloring"])]
    pub check: Option<String>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value = "maxcut")]
    pub problem: String,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SDPXLAB_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(anyhow::anyhow!("SDPXLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(anyhow::anyhow!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Color(a) => commands::color(a),
        Command::NnForward(a) => commands::nn_forward(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => commands::bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code())
        }
    }
}
