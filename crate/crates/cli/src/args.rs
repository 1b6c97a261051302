use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used when none is given, so runs are reproducible by default.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(
    name = "lsf",
    version,
    about = "Massive spanning forests: sampling, exact laws and limit shapes"
)]
pub struct Cli {
    /// Worker threads for sample batches (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw forests with Wilson's algorithm with killing.
    Sample(SampleArgs),
    /// Draw truncated limit trees (T0, T_alpha, Poisson Galton-Watson).
    SampleLimit(SampleLimitArgs),
    /// Exact and determinantal queries on one graph.
    Exact(ExactArgs),
    /// Run the oracle-versus-formula suites.
    Verify(VerifyArgs),
    /// Tabulate a shape law.
    Limit(LimitArgs),
    /// Finite-n against limit probabilities as CSV.
    ConvergenceTable(TableArgs),
    /// Finite-n probability series per shape for plotting.
    PlotData(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

/// Exactly one of `--n` (complete graph) or `--graph` (edge-list file).
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Complete graph on this many vertices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Edge-list file: vertex count on the first line, then one `tail head` pair per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    /// Count unrooted forests by edge set.
    Forest,
    /// Count shapes of vertex 0's component cut at `--h`.
    RootShape,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    /// Mass parameter, "p/q" or decimal.
    #[arg(long)]
    pub lambda: String,
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    /// Emit a histogram instead of individual samples.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
    /// Truncation height for `--aggregate root-shape`.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// Use the general-graph sampler even on a complete graph.
    #[arg(long)]
    pub general: bool,
    /// With `--aggregate`, compare against the exact law.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitTree {
    T0,
    TAlpha,
    Bgwp,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleLimitArgs {
    #[arg(long, value_enum)]
    pub tree: LimitTree,
    /// Parameter of `t-alpha`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Offspring mean of `bgwp`, in (0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub h: usize,
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Compare the histogram with the exact law on shapes up to `--max-size` vertices.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value_t = 10)]
    pub max_size: usize,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Query {
    /// Probability of an edge event (`--include-edge`, `--exclude-edge`).
    Event,
    /// Coefficients of det(L + xI).
    CharPoly,
    /// The resolvent matrix.
    Resolvent,
    /// Expected number of components.
    MeanComponents,
    /// Full law over forests (enumeration).
    ForestLaw,
    /// Law of vertex 0's component shape cut at `--h` (enumeration).
    ShapeLaw,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    /// Mass parameter, "p/q" or decimal.
    #[arg(long)]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = Query::Event)]
    pub query: Query,
    /// Edge that must be present, by endpoints "a,b" (repeatable; repeat a pair for parallel edges).
    #[arg(long = "include-edge")]
    pub include_edges: Vec<String>,
    /// Edge that must be absent, by endpoints "a,b" (repeatable).
    #[arg(long = "exclude-edge")]
    pub exclude_edges: Vec<String>,
    /// Edge indices (edge-list order) that must be present.
    #[arg(long = "include-index", value_delimiter = ',')]
    pub include: Vec<usize>,
    /// Edge indices (edge-list order) that must be absent.
    #[arg(long = "exclude-index", value_delimiter = ',')]
    pub exclude: Vec<usize>,
    /// Also compute the answer exactly by enumerating forests.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Small families only (seconds instead of minutes).
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_event_edges: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_graphs: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    /// Vertex 0's component on K_n (`--n`, `--lambda`).
    Finite,
    /// lambda_n = o(n); also the T0 law.
    Sublinear,
    /// lambda_n ~ alpha n: the T_alpha law (`--alpha`).
    Linear,
    /// lambda_n >> n: the singleton.
    Superlinear,
    /// Poisson Galton-Watson (`--beta`).
    Bgwp,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub law: LawKind,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub h: usize,
    /// Shapes as bracket codes, e.g. "(()())"; defaults to all shapes up to `--max-size`.
    #[arg(long = "shape", value_delimiter = ',')]
    pub shapes: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    /// Evaluate exactly in rationals (finite law only).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Sublinear,
    Linear,
    Superlinear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    /// Linear regime lambda_n = alpha n.
    #[arg(long, conflicts_with = "regime")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Regime other than linear (lambda_n = sqrt(n) or n^2).
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeKind>,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long = "n", value_delimiter = ',', default_values_t = [100usize, 1000, 10000])]
    pub ns: Vec<usize>,
    #[arg(long = "shape", value_delimiter = ',')]
    pub shapes: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}
