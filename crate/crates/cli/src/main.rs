//! `delstab`: protection, thickness and stability experiments on point sets.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit code for I/O failures.
pub const EXIT_IO: u8 = 2;
/// Exit code for malformed input files.
pub const EXIT_PARSE: u8 = 3;
/// Exit code for violated preconditions, including invalid arguments.
pub const EXIT_PRECONDITION: u8 = 4;
/// Exit code for a failed check.
pub const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "delstab",
    version,
    about = "Protection, thickness and stability of Delaunay triangulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Generate a point set.
    Gen(GenArgs),
    /// Sampling parameters, protection, thickness certificate and audit.
    Analyze(AnalyzeArgs),
    /// Point, metric and relaxation stability trials.
    Stability(StabilityArgs),
    /// Relaxed Delaunay star of P_J compared with the Delaunay star.
    Relax(RelaxArgs),
    /// Metric Delaunay star of P_J under a random pullback metric.
    Metric(MetricArgs),
    /// Compare the stars of two complexes under a vertex map.
    Compare(CompareArgs),
    /// Stability budgets from explicit or measured parameters.
    Budget(BudgetArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct OutputArgs {
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Generator {
    Grid,
    Uniform,
    DeltaSearch,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    /// Lattice shape, e.g. `9,9`.
    #[arg(long, value_delimiter = ',', default_value = "6,6")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Per-coordinate offset bound as a fraction of the spacing.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Number of points for `uniform`.
    #[arg(long, default_value_t = 40)]
    n: usize,
    /// Ambient dimension for `uniform`.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    /// Candidates for `delta-search`.
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path for the point file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the per-candidate report of `delta-search`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// `auto` (all deep interior points) or a comma-separated id list.
    #[arg(long, default_value = "auto")]
    pj: String,
    #[command(flatten)]
    output: OutputArgs,
    /// Also write the Delaunay complex and its balls as JSON.
    #[arg(long)]
    complex_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct StabilityArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// JSON batch specification; replaces `--in`, `--pj`,
    /// `--budget-fraction`, `--seeds-count` and `--models`.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    pj: String,
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    budget_fraction: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    seeds_count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trial kinds: uniform, radial, adversarial, metric, metric-generic,
    /// relaxation.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "uniform,radial,adversarial"
    )]
    models: Vec<String>,
    /// Run even when the lemma audit does not pass.
    #[arg(long)]
    force: bool,
    /// Also write one JSON verdict per line to this path.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long, hide = true)]
    #[serde(skip)]
    inject_fault: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct RelaxArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "auto")]
    pj: String,
    /// Relaxation; defaults to the budget fraction of the point budget.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    budget_fraction: f64,
    /// Objective evaluations per candidate before it is undecided.
    #[arg(long)]
    max_evaluations: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct MetricArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "auto")]
    pj: String,
    /// Field amplitude `a`; defaults to half the budget fraction of the
    /// metric budget.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    budget_fraction: f64,
    /// Use the budget that depends on protection alone.
    #[arg(long)]
    generic_budget: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, hide = true)]
    #[serde(skip)]
    inject_fault: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    /// First complex: JSON array of vertex-id arrays.
    #[arg(long)]
    k: PathBuf,
    /// Second complex.
    #[arg(long)]
    k2: PathBuf,
    /// Vertex map as a JSON array of images or an object of id pairs;
    /// identity when absent.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Star centre; all vertices of the first complex when absent.
    #[arg(long)]
    pj: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct BudgetArgs {
    /// Measure the parameters from a point file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    pj: String,
    /// Use the certified parameters instead of measured ones.
    #[arg(long)]
    certified: bool,
    #[arg(long)]
    upsilon0: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nu_tilde: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PRECONDITION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
