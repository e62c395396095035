use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use clairvoyant::geometry::ConnectionKind;
use clairvoyant::montecarlo::Alphabet;
use clairvoyant::Role;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "clairvoyant",
    version,
    about = "Coordinate percolation, multiscale blocks and clairvoyant schedules"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Parameter file (`key=value` per line, `#` comments).
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,

    /// Base preset the parameter file and overrides apply to.
    #[arg(long, global = true, default_value = "toy")]
    pub preset: String,

    /// Result path. `json`, `csv`, `text` or `-` write to stdout; any other
    /// value is a file and gets a `<out>.manifest.json` next to it.
    #[arg(long, global = true)]
    pub out: Option<String>,

    /// Monte Carlo worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Decide Monte Carlo thresholds on the point estimate alone.
    #[arg(long, global = true)]
    pub force_point_estimate: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    #[arg(id = "param_alpha", long = "alpha", global = true)]
    pub alpha: Option<String>,
    #[arg(id = "param_beta", long = "beta", global = true)]
    pub beta: Option<String>,
    #[arg(id = "param_delta", long = "delta", global = true)]
    pub delta: Option<String>,
    #[arg(id = "param_m", long = "m", global = true)]
    pub m: Option<String>,
    #[arg(id = "param_k0", long = "k0", global = true)]
    pub k0: Option<String>,
    #[arg(id = "param_r", long = "R", global = true)]
    pub r: Option<String>,
    #[arg(id = "param_l0", long = "L0", global = true)]
    pub l0: Option<String>,
    #[arg(id = "param_mode", long = "mode", global = true)]
    pub mode: Option<String>,
    #[arg(id = "param_p_len", long = "p-len", global = true)]
    pub p_len: Option<String>,
    #[arg(id = "param_p_chunk", long = "p-chunk", global = true)]
    pub p_chunk: Option<String>,
    #[arg(id = "param_p_run", long = "p-run", global = true)]
    pub p_run: Option<String>,
    #[arg(id = "param_p_geom", long = "p-geom", global = true)]
    pub p_geom: Option<String>,
    #[arg(id = "param_p_cell", long = "p-cell", global = true)]
    pub p_cell: Option<String>,
    /// Any parameter as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Overrides {
    pub fn pairs(&self) -> Vec<(&'static str, &str)> {
        let named = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("delta", &self.delta),
            ("m", &self.m),
            ("k0", &self.k0),
            ("R", &self.r),
            ("L0", &self.l0),
            ("mode", &self.mode),
            ("p_len", &self.p_len),
            ("p_chunk", &self.p_chunk),
            ("p_run", &self.p_run),
            ("p_geom", &self.p_geom),
            ("p_cell", &self.p_cell),
        ];
        named
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Path-existence queries on a pair of sequences.
    Percolate(PercolateArgs),
    /// Survival curve P(depth >= n) as CSV.
    Survive(SurviveArgs),
    /// Block partition of a sequence up to a level.
    Blocks(BlocksArgs),
    /// Goodness verdicts of sampled blocks, one JSON record per line.
    Goodness(GoodnessArgs),
    /// Cell routes in a grid of cells.
    Route(RouteArgs),
    /// A schedule reaching depth n, or BLOCKED with the best depth.
    Schedule(ScheduleArgs),
    /// Empirical tail, length and goodness estimates at one level.
    CheckEstimates(CheckArgs),
    /// Validate the resolved parameter set.
    ParamsValidate,
    /// Write a random sequence file.
    Generate(GenerateArgs),
    /// Re-execute the run recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Percolate(_) => "percolate",
            Command::Survive(_) => "survive",
            Command::Blocks(_) => "blocks",
            Command::Goodness(_) => "goodness",
            Command::Route(_) => "route",
            Command::Schedule(_) => "schedule",
            Command::CheckEstimates(_) => "check-estimates",
            Command::ParamsValidate => "params-validate",
            Command::Generate(_) => "generate",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Query {
    Cc,
    Cs,
    Sc,
    Ss,
    Depth,
    Nonoriented,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PercolateArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// `a1,a2,b1,b2`, 1-based inclusive; defaults to the full rectangle.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub rect: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub query: Query,
    /// Level of the sub-blocks for cs/sc/ss.
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    /// Level-0 lengths of the X sub-blocks; defaults to all ones.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub x_subs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub y_subs: Option<Vec<usize>>,
    /// Depth cap or box size for depth/nonoriented; defaults to the shorter
    /// sequence.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SurviveArgs {
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub depths: Vec<usize>,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub alphabet: AlphabetArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetArg {
    Uniform,
    Disjoint,
}

impl From<AlphabetArg> for Alphabet {
    fn from(a: AlphabetArg) -> Self {
        match a {
            AlphabetArg::Uniform => Alphabet::Uniform,
            AlphabetArg::Disjoint => Alphabet::Disjoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleArg {
    X,
    Y,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::X => Role::X,
            RoleArg::Y => Role::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoodnessSource {
    /// Monte Carlo goodness.
    Mc,
    /// Every sub-block good.
    Good,
    /// Every sub-block bad.
    Bad,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BlocksArgs {
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    #[arg(long)]
    pub seq: PathBuf,
    #[arg(long, value_enum, default_value = "x")]
    pub role: RoleArg,
    /// How sub-block goodness is decided above level 1.
    #[arg(long, value_enum, default_value = "mc")]
    pub goodness: GoodnessSource,
    /// Monte Carlo samples per goodness condition.
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GoodnessArgs {
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Number of blocks drawn.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long = "M", default_value_t = 8)]
    pub m: u32,
    #[arg(long, value_enum, default_value = "x")]
    pub role: RoleArg,
    /// Rejection attempts for conditioned sampling.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    Cc,
    Cs,
    Sc,
    Ss,
}

impl RouteKind {
    pub fn connection(self) -> Option<ConnectionKind> {
        match self {
            RouteKind::Cc => None,
            RouteKind::Cs => Some(ConnectionKind::CornerToSide),
            RouteKind::Sc => Some(ConnectionKind::SideToCorner),
            RouteKind::Ss => Some(ConnectionKind::SideToSide),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RouteArgs {
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub tprime: usize,
    /// JSON `{"n": [..], "n_prime": [..]}`; defaults to square cells of the
    /// smallest legal side.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, value_enum, default_value = "cc")]
    pub kind: RouteKind,
    /// Lower bound on t and t' for cs/sc/ss; defaults to 5^(j+6) R.
    #[arg(long)]
    pub min_side: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Number of blocks in the ensemble.
    #[arg(long, default_value_t = 100)]
    pub ensemble: u64,
    #[arg(long = "M", default_value_t = 8)]
    pub m: u32,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.25,0.5,0.75")]
    pub p_grid: Vec<f64>,
    #[arg(long, default_value_t = 1.05)]
    pub mgf_tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqFormat {
    Text,
    Binary,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "x")]
    pub role: RoleArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: SeqFormat,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}
