use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cylfi::moments::DEFAULT_MAX_DEGREE;

/// Moment functionals, Green functions and generating functionals of
/// Gaussian cylindrical distributions.
#[derive(Debug, Parser)]
#[command(name = "cylfi", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green functions F₀…F_k in the full model basis.
    Green(GreenArgs),
    /// Evaluate a polynomial against a projected moment functional.
    Moment(MomentArgs),
    /// Randomized compatibility, functoriality and quadrature checks.
    Check(CheckArgs),
    /// Pure-imaginary limit of a real form through an ε-schedule.
    Limit(LimitArgs),
    /// Truncated generating functional Z_D(φ).
    Genfun(GenfunArgs),
    /// Normalized Gaussian moment by grid quadrature.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    /// B = i·(−Δ + m²)⁻¹ on a periodic chain.
    KgEuclidean,
    /// Real form (−Δ + m²)⁻¹ on a periodic chain, taken to the ε → 0 limit.
    KgMinkowski,
}

impl KernelName {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelName::KgEuclidean => "kg-euclidean",
            KernelName::KgMinkowski => "kg-minkowski",
        }
    }
}

/// Where the covariance form comes from: a built-in kernel or a JSON file.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, value_enum, conflicts_with = "form", required_unless_present = "form")]
    pub kernel: Option<KernelName>,

    /// Bilinear form JSON: {"dim": N, "matrix": [[[re, im], ...], ...]}.
    #[arg(long)]
    pub form: Option<PathBuf>,

    #[arg(long, default_value_t = 2)]
    pub sites: usize,

    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,

    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct DegreeArg {
    /// Truncation degree D of the carried moment series.
    #[arg(long, env = "CYLFI_MAX_DEGREE", default_value_t = DEFAULT_MAX_DEGREE)]
    pub degree: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GreenArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long)]
    pub order: usize,

    #[command(flatten)]
    pub degree: DegreeArg,

    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Projection JSON: {"dim": N, "rows": [[...], ...]}. Identity when absent.
    #[arg(long)]
    pub proj: Option<PathBuf>,

    /// Polynomial such as "3*s1^2*s2 - (0,1)*s3".
    #[arg(long, allow_hyphen_values = true)]
    pub poly: String,

    #[command(flatten)]
    pub degree: DegreeArg,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: u64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Largest model dimension N.
    #[arg(long, default_value_t = 6)]
    pub max_dim: usize,

    /// Largest number of projection rows and linear-map outputs.
    #[arg(long, default_value_t = 4)]
    pub max_rows: usize,

    /// Largest truncation degree drawn.
    #[arg(long, default_value_t = 6)]
    pub max_degree: usize,

    /// Flip the sign of a computed moment to confirm the harness fails.
    #[arg(long)]
    pub sabotage: bool,

    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long)]
    pub proj: Option<PathBuf>,

    /// Strictly decreasing ε values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,

    /// Polynomial order of the ε → 0 extrapolation.
    #[arg(long, default_value_t = 1)]
    pub order: usize,

    #[command(flatten)]
    pub degree: DegreeArg,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenfunArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Coefficients of the real test function φ, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub phi: Vec<f64>,

    #[command(flatten)]
    pub degree: DegreeArg,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Form JSON; its restriction to the projection is the Gram matrix.
    #[arg(long)]
    pub form: PathBuf,

    #[arg(long)]
    pub proj: Option<PathBuf>,

    #[arg(long, allow_hyphen_values = true)]
    pub poly: String,

    /// Grid points per axis (odd); dimension-dependent default when absent.
    #[arg(long)]
    pub points: Option<usize>,

    /// Box half-width in decay lengths.
    #[arg(long, default_value_t = 12.0)]
    pub sigmas: f64,
}
