//! `lpm`: Lévy–Prokhorov distances, witness functions, reconstruction and
//! isometry checks from the command line.
//!
//! Exit codes: 0 success, 1 verification or reconstruction failure, 2 input
//! error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_prokhorov::Method;

#[derive(Debug, Parser)]
#[command(name = "lpm", version, about = "Exact Lévy–Prokhorov distances between finitely supported measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance between two measures.
    Dist(DistArgs),
    /// Witness function W(x) = π(δ_x, μ) at points or on a grid (CSV).
    Witness(WitnessArgs),
    /// Witness profile along an exposing ray from a hull vertex.
    Profile(ProfileArgs),
    /// Recover a hidden measure's weights from distance queries.
    Reconstruct(ReconstructArgs),
    /// Check that an isometry's push-forward preserves distances.
    Invariance(InvarianceArgs),
    /// Draw an empirical measure and report its distance to the target.
    Sample(SampleArgs),
    /// Run the built-in property suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long, default_value = "flow")]
    pub method: Method,
    /// Mass scale s of the s-LP distance.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Largest accepted |brute − flow| under `--method both`.
    #[arg(long, default_value_t = 1e-9)]
    pub cross_check_tol: f64,
    /// Support cap for the brute-force method.
    #[arg(long, default_value_t = 12)]
    pub support_cap: usize,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Point as JSON: a coordinate array or an index; repeatable.
    #[arg(long = "point")]
    pub points: Vec<String>,
    /// Regular grid `LO,HI,N` along every axis.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Every point of a finite space.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Support point to probe from (JSON coordinates).
    #[arg(long)]
    pub vertex: String,
    /// Ray direction (JSON); normalized. Default: a verified exposing ray.
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Grid step; default s/160.
    #[arg(long)]
    pub step: Option<f64>,
    /// Largest t sampled; default 1.25·s.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Write the CSV here and print the summary on stdout. Without it the
    /// CSV goes to stdout and the summary to stderr.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Hidden measure answering the distance queries.
    #[arg(long)]
    pub hidden: PathBuf,
    /// JSON array of support points.
    #[arg(long, required_unless_present = "experimental_support_search")]
    pub support: Option<PathBuf>,
    /// Guess the support from local minima of the witness on `--grid`.
    #[arg(long)]
    pub experimental_support_search: bool,
    /// `LO,HI,N` grid for the support search.
    #[arg(long, default_value = "-2,2,81", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value_t = 12)]
    pub support_cap: usize,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    /// Directory of measure JSON files (all on one space).
    #[arg(long, conflicts_with = "random_measures")]
    pub measures: Option<PathBuf>,
    /// Generate this many random measures instead.
    #[arg(long)]
    pub random_measures: Option<usize>,
    /// Dimension for random measures.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Norm exponent for random measures: a number or `inf`.
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, conflicts_with = "random_isometry")]
    pub isometry: Option<PathBuf>,
    #[arg(long)]
    pub random_isometry: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the pair computations; output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the empirical measure here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Dist(a) => commands::dist(&a),
        Command::Witness(a) => commands::witness(&a),
        Command::Profile(a) => commands::profile(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Invariance(a) => commands::invariance(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Selftest(a) => commands::selftest(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
