//! Command-line front end: argument model, input handling and dispatch.

pub mod input;
pub mod output;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use input::{load_csv, log_diff, parse_series};
pub use run::run;

#[derive(Debug, Parser)]
#[command(name = "evospec", version, about = "Evolutionary spectra, stationarity tests and taper trade-offs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// The parsed run configuration.
pub type RunConfig = Cli;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slepian tapers, eigenvalues and spectral-window concentration.
    Dpss(DpssArgs),
    /// Time-frequency grid of evolutionary spectrum estimates.
    Estimate(EstimateArgs),
    /// PSR and/or RS stationarity test on one series.
    Test(TestArgs),
    /// Simulate a catalogue model.
    Simulate(SimulateArgs),
    /// Monte Carlo rejection rates of both tests.
    Mc(McArgs),
    /// Bias/variance trade-off curves for the taper count.
    Tradeoff(TradeoffArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    None,
    Logdiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Psr,
    Rs,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    #[value(name = "+1", alias = "plus", alias = "+")]
    Plus,
    #[value(name = "-1", alias = "minus", alias = "-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaArg {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    /// W = Kπ/N
    Minimal,
    /// W = (K+1)π/N
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    Natural,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Exactly one of a data file or a catalogue model.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Series file: one value per line, or `index,value` with an optional header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Catalogue model a..h to simulate instead.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimParams {
    /// Length of simulated series.
    #[arg(long = "T", default_value_t = 512)]
    pub t: usize,
    #[arg(long, env = "EVOSPEC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Multiply the model by the Gaussian modulation with this exponent sign
    /// (model h is always modulated).
    #[arg(long, allow_hyphen_values = true)]
    pub modulate: Option<Sign>,
}

#[derive(Debug, Args)]
pub struct GridParams {
    /// Number of tapers.
    #[arg(long = "K", default_value_t = evospec_core::evospec::DEFAULT_TAPERS)]
    pub k: usize,
    /// Number of blocks I (default max(2, ⌊log₂ T⌋)).
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Frequency buffer as a fraction of the spacing B.
    #[arg(long, default_value_t = evospec_core::evospec::DEFAULT_BUFFER_FRAC)]
    pub buffer_frac: f64,
}

#[derive(Debug, Args)]
pub struct DpssArgs {
    /// Taper length (odd).
    #[arg(long = "N")]
    pub n: usize,
    /// Number of tapers.
    #[arg(long = "K", default_value_t = evospec_core::evospec::DEFAULT_TAPERS)]
    pub k: usize,
    /// Half-bandwidth in radians (default (K+1)π/N).
    #[arg(long = "W")]
    pub w: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub sim: SimParams,
    #[command(flatten)]
    pub grid: GridParams,
    #[arg(long, value_enum, default_value_t = Transform::None)]
    pub transform: Transform,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub sim: SimParams,
    #[command(flatten)]
    pub grid: GridParams,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Transform::None)]
    pub transform: Transform,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Catalogue model a..h.
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub sim: SimParams,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Comma-separated models (a..h) or `all`.
    #[arg(long, default_value = "all")]
    pub model: String,
    /// Replicates per model.
    #[arg(long = "M", default_value_t = 1000)]
    pub m: usize,
    #[command(flatten)]
    pub sim: SimParams,
    #[command(flatten)]
    pub grid: GridParams,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// Width a of the Gaussian modulation; B_FY = a√(π/2).
    #[arg(long, default_value_t = 200.0)]
    pub a: f64,
    /// Window lengths `lo:hi[:step]`; only odd N are used. Without a step at
    /// most 64 lengths are taken.
    #[arg(long = "Ns", default_value = "17:513")]
    pub ns: String,
    #[arg(long, value_enum, default_value_t = FormulaArg::Full)]
    pub formula: FormulaArg,
    /// Instead of a curve over N, list every K at this N.
    #[arg(long)]
    pub sweep_k: Option<usize>,
    /// Weight c of the penalty c·K reported alongside each point.
    #[arg(long, default_value_t = 1.0)]
    pub penalty_weight: f64,
    /// Minimize the full surrogate plus the penalty instead of the formula alone.
    #[arg(long)]
    pub penalized: bool,
    #[arg(long, value_enum, default_value_t = CouplingArg::Minimal)]
    pub coupling: CouplingArg,
    #[arg(long, value_enum, default_value_t = LogBaseArg::Two)]
    pub log_base: LogBaseArg,
    #[command(flatten)]
    pub out: OutputArgs,
}
