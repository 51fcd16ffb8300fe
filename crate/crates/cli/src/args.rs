use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "maglab", version, about = "Magnitude functions, complex powers and beta functions of metric measure spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the artifact to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Treat metric-axiom violations in finite space files as errors.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of M(R, nu) over a grid of R and a list of nu.
    Mag(MagArgs),
    /// Beta function values on a list of z, or its poles in a rectangle.
    Beta(BetaArgs),
    /// Large-R expansion of m(R) fitted from samples.
    Expand(ExpandArgs),
    /// Exact conversion of an expansion between two powers nu.
    Convert(ConvertArgs),
    /// The partition polynomials g_0, ..., g_J.
    Gtable(GtableArgs),
    /// End-to-end check of the expansion, power and pole dictionary.
    #[command(name = "verify-thm2")]
    VerifyThm2(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SpaceArgs {
    /// Built-in radial space: `sphere:n=<int>:metric=<chordal|geodesic>:normalized=<bool>`,
    /// `padic:p=<prime>` or `twopoint`.
    #[arg(long)]
    pub space: Option<String>,

    /// Finite space file with `labels`, `dist` and optional `measure`.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MagArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    /// Scale grid: `r1,r2,...` or `start:stop:count`.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: String,

    /// Powers: comma-separated real or complex numbers such as `-1`, `0.5+2i`.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub nu: String,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// Built-in radial space.
    #[arg(long)]
    pub space: String,

    /// Arguments: comma-separated real or complex numbers.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "poles", required_unless_present = "poles")]
    pub z: Option<String>,

    /// Scan for poles instead of evaluating.
    #[arg(long, requires = "rect")]
    pub poles: bool,

    /// Scan rectangle `re_lo,re_hi,im_lo,im_hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,

    /// Continuation depth `M,N`: Taylor terms at 0 and expansion terms at infinity.
    #[arg(long, default_value = "2,6")]
    pub depth: String,

    /// Cell size of the pole scan.
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Built-in radial space.
    #[arg(long)]
    pub space: String,

    /// Highest coefficient index.
    #[arg(long)]
    pub order: usize,

    /// Leading exponent; detected from the samples when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Leading exponent, an exact rational.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: String,

    /// Coefficients `c0,c1,...` as exact rationals (`1/3`, `-2`, `0.25`).
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,

    #[arg(long = "from-nu", allow_hyphen_values = true)]
    pub from_nu: String,

    #[arg(long = "to-nu", allow_hyphen_values = true)]
    pub to_nu: String,
}

#[derive(Debug, Args)]
pub struct GtableArgs {
    #[arg(long = "max-j")]
    pub max_j: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Built-in radial space.
    #[arg(long)]
    pub space: String,

    #[arg(long)]
    pub order: usize,

    /// Real powers to check, comma-separated.
    #[arg(long, allow_hyphen_values = true, default_value = "1,-1")]
    pub nu: String,

    /// Tolerance of each link; defaults to `MAGLAB_TOL` or 1e-6.
    #[arg(long)]
    pub tol: Option<f64>,
}
