use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// ROF regularization and total-variation flow on graphs.
///
/// Inputs are problem files (JSON) or `builtin:counterexample` or `builtin:variant`.
#[derive(Debug, Parser)]
#[command(name = "graphtv", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve ROF at given alphas, or compute the whole solution path.
    Rof(RofArgs),
    /// Integrate the TV flow and report it at breakpoints and sample times.
    Flow(FlowArgs),
    /// Compare ROF and flow on a grid of alphas.
    Compare(CompareArgs),
    /// Run a verification: φ-minimality, the isotropic witness search, or
    /// the counterexample reproduction.
    Verify(VerifyArgs),
    /// Write a built-in instance as a problem file.
    Instance(InstanceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    /// Relative threshold below which a difference counts as zero.
    #[arg(long)]
    pub flat_tol: Option<f64>,
    #[arg(long)]
    pub solve_tol: Option<f64>,
    #[arg(long)]
    pub event_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RofArgs {
    pub input: String,
    /// Comma-separated regularization parameters.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Emit the exact piecewise-affine path: a row at every knot.
    #[arg(long)]
    pub path: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    pub input: String,
    /// Comma-separated sample times.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_end: Vec<f64>,
    /// Add a row at time 0 and at every breakpoint.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub input: String,
    /// Comma-separated positive alphas.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Phimin,
    Isotropic,
    Counterexample,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub mode: VerifyMode,
    /// Problem files; unused in counterexample mode.
    pub inputs: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Random fields to add to the isotropic search.
    #[arg(long, default_value_t = 0)]
    pub random_fields: usize,
    /// Random piecewise-linear functions to add to the catalog.
    #[arg(long, default_value_t = 3)]
    pub piecewise_linear: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted relative φ-gap in phimin mode.
    #[arg(long, default_value_t = 1e-5)]
    pub gap_limit: f64,
    /// Smallest φ-gap counted as an isotropic witness.
    #[arg(long, default_value_t = 1e-4)]
    pub min_margin: f64,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// counterexample or variant.
    pub name: String,
    #[command(flatten)]
    pub output: OutputArgs,
}
