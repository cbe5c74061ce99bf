use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "interlace",
    version,
    about = "Random interlacements, Gaussian fields and renormalized intersection local times",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Green's function of the killed walk on a box.
    Green(GreenArgs),
    /// Equilibrium measure and capacity of K, with hitting probabilities.
    Equilibrium(EquilibriumArgs),
    /// Sample interlacement soups restricted to K.
    Soup(SoupArgs),
    /// Sample the Gaussian field on a window and check its covariance.
    Gff(GffArgs),
    /// Check one identity exactly or by Monte Carlo.
    Verify(VerifyArgs),
    /// Exact soup and field moments at a list of points.
    Moments(MomentsArgs),
    /// Continuum chain asymptotics against h(1/ε).
    Asymptotics(AsymptoticsArgs),
    /// Run the full acceptance suite.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Green(_) => "green",
            Command::Equilibrium(_) => "equilibrium",
            Command::Soup(_) => "soup",
            Command::Gff(_) => "gff",
            Command::Verify(_) => "verify",
            Command::Moments(_) => "moments",
            Command::Asymptotics(_) => "asymptotics",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Green(a) => &a.output,
            Command::Equilibrium(a) => &a.output,
            Command::Soup(a) => &a.output,
            Command::Gff(a) => &a.output,
            Command::Verify(a) => &a.output,
            Command::Moments(a) => &a.output,
            Command::Asymptotics(a) => &a.output,
            Command::Selftest(a) => &a.output,
        }
    }

    pub fn config_json(&self) -> serde_json::Value {
        let v = match self {
            Command::Green(a) => serde_json::to_value(a),
            Command::Equilibrium(a) => serde_json::to_value(a),
            Command::Soup(a) => serde_json::to_value(a),
            Command::Gff(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
            Command::Moments(a) => serde_json::to_value(a),
            Command::Asymptotics(a) => serde_json::to_value(a),
            Command::Selftest(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }
}

/// Walk parameters shared by every lattice command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct WalkArgs {
    /// Lattice dimension (1 to 3).
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Killing rate κ > 0.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Jump kernel as `jump:weight` pairs separated by `;`, e.g. `1,0:0.3;-1,0:0.3;0,1:0.2;0,-1:0.2`.
    /// Defaults to the uniform nearest-neighbour kernel.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Relative tolerance of the Green's function quadrature.
    #[arg(long, default_value_t = 1e-12)]
    pub green_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Directory for the JSON report and CSV files. Falls back to $INTERLACE_OUT_DIR.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// key=value configuration file; flags on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GreenArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Sup-norm radius of the tabulated box.
    #[arg(long, default_value_t = 3)]
    pub radius: i64,
    /// Bound on the resolvent residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Sites of K: points separated by `;`, coordinates by `,`.
    #[arg(long = "K", default_value = "0")]
    pub k: String,
    /// Sites at which to report hitting probabilities of K.
    #[arg(long)]
    pub window: Option<String>,
    /// Bound on the equilibrium residual max_x |Σ_y u(x−y) e(y) − 1|.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SoupArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long = "K", default_value = "0")]
    pub k: String,
    /// Intensity α ≥ 0.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Number of soups written out in full.
    #[arg(long, default_value_t = 1)]
    pub dump: u64,
    /// Extra sites for the local-time CSV of soup 0.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    pub z_bound: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GffArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Window sites. Defaults to the box of the given radius.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub radius: i64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 4.0)]
    pub z_bound: f64,
    /// Bound on the relative reconstruction residual of the factor.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    /// Isomorphism between renormalized local times and Wick powers.
    Iso,
    /// ρ sums against the binomial closed form.
    Rho,
    /// Generating function, recursion and ljo routes for the rilt polynomials.
    Rilt,
    /// Wick powers against Hermite, Laguerre and shifted forms.
    Wick,
    /// A- and B-coefficient expansions.
    Coefficients,
    /// The multinomial sum identity.
    Multinomial,
    /// Pairing census against the closed count.
    Pairing,
    /// Pathwise decomposition over soup trajectories.
    Decomposition,
    /// Readings of the joint rilt moment formula against the expansion route.
    Crosscheck,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub identity: Identity,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long = "K", default_value = "0")]
    pub k: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Power n of the isomorphism, or the largest L_n of the decomposition.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Largest total order of the multi-indices (iso).
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    /// Largest degree for the algebraic identities. Each identity has its own default.
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Largest |R| for the pairing census.
    #[arg(long, default_value_t = 5)]
    pub r: u32,
    /// Largest |S|+|U| for the pairing census.
    #[arg(long, default_value_t = 6)]
    pub e: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples (iso) or soups (decomposition). Zero skips sampling.
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    /// Tolerance override for the pointwise Wick checks.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub z_bound: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Points x_1..x_k, repeats allowed.
    #[arg(long)]
    pub points: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Soups for a Monte Carlo estimate of E[Π L(x_i)]. Zero skips sampling.
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    #[arg(long, default_value_t = 4.0)]
    pub z_bound: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AsymptoticsArgs {
    /// `brownian` or `log:<a>`.
    #[arg(long, default_value = "brownian")]
    pub exponent: String,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 3)]
    pub kmax: u32,
    /// Comma-separated ε values. Defaults to 2^-3, …, 2^-10.
    #[arg(long)]
    pub eps_grid: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    pub spread_bound: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelftestArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count for the sampling criteria.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of soups for the decomposition criterion.
    #[arg(long)]
    pub soups: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
