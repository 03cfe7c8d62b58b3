use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ladcd::{GaConfig, RidgeConfig, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "ladcd", version, about = "Least absolute deviations regression by coordinate descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a LAD regression to a CSV file.
    Fit(FitArgs),
    /// Write a synthetic Gaussian design, optionally with outliers.
    Synth(SynthArgs),
    /// Repeat fits on synthetic data and summarize the spread of the final MAE.
    Replicate(ReplicateArgs),
    /// Time fits over a grid of predictor counts and initializers.
    Bench(BenchArgs),
    /// Solve a small instance exactly by vertex enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Zero,
    Ridge,
    Ga,
    Multistart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReplicateInitKind {
    Random,
    Zero,
    Ridge,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    pub response: String,
    /// Prepend an all-ones intercept column (the default).
    #[arg(long, overrides_with = "no_intercept")]
    pub intercept: bool,
    #[arg(long)]
    pub no_intercept: bool,
    /// Drop rows with missing or non-numeric cells instead of failing.
    #[arg(long)]
    pub drop_na: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// Stop when the relative objective decrease of a sweep falls below this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Entries with |x_ij| at or below this are ignored by coordinate j.
    #[arg(long, default_value_t = 1e-12)]
    pub zero_threshold: f64,
    /// Sweeps between full residual recomputations.
    #[arg(long, default_value_t = 50)]
    pub refresh_every: usize,
    /// Disable joint descent steps at coordinate-wise stationary points.
    #[arg(long)]
    pub no_escape: bool,
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            max_sweeps: self.max_sweeps,
            tol: self.tol,
            zero_threshold: self.zero_threshold,
            residual_refresh_every: self.refresh_every,
            seed,
            escape_stalls: !self.no_escape,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RidgeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub ridge_lambda: f64,
    /// Penalize the intercept as well.
    #[arg(long)]
    pub ridge_penalize_intercept: bool,
}

impl RidgeArgs {
    pub fn config(&self) -> RidgeConfig {
        RidgeConfig {
            lambda: self.ridge_lambda,
            penalize_intercept: self.ridge_penalize_intercept,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GaArgs {
    #[arg(long, default_value_t = 100)]
    pub ga_population: usize,
    #[arg(long, default_value_t = 200)]
    pub ga_generations: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ga_mutation_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ga_mutation_scale: f64,
    #[arg(long, default_value_t = 0.9)]
    pub ga_crossover_rate: f64,
    /// Ridge penalty on non-intercept coefficients inside the fitness.
    #[arg(long, default_value_t = 1e-3)]
    pub ga_penalty: f64,
    #[arg(long, default_value_t = 2)]
    pub ga_elite: usize,
}

impl GaArgs {
    pub fn config(&self, seed: u64) -> GaConfig {
        GaConfig {
            population: self.ga_population,
            generations: self.ga_generations,
            mutation_rate: self.ga_mutation_rate,
            mutation_scale: self.ga_mutation_scale,
            crossover_rate: self.ga_crossover_rate,
            penalty_lambda: self.ga_penalty,
            elite_count: self.ga_elite,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = InitKind::Zero)]
    pub init: InitKind,
    #[command(flatten)]
    pub ridge: RidgeArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Number of random starts for `--init multistart`.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Standard deviation of random starting coefficients.
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-sweep trace CSV (sweep, objective, train_mae).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Exit with status 3 if the sweep budget runs out before convergence.
    #[arg(long)]
    pub strict: bool,
    /// Record wall-clock timings (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    /// Predictors, excluding the intercept.
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit true coefficients, intercept first (p + 1 values).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    /// Generate without an intercept term.
    #[arg(long)]
    pub no_intercept: bool,
    /// Fraction of rows whose response is replaced by an outlier.
    #[arg(long, default_value_t = 0.0)]
    pub contam_frac: f64,
    #[arg(long, default_value_t = 25.0)]
    pub contam_sigma: f64,
    /// Constant added to every outlier's noise.
    #[arg(long, default_value_t = 0.0)]
    pub contam_shift: f64,
    /// Use |N(0, contam_sigma²)| noise so all outliers lie above the plane.
    #[arg(long)]
    pub contam_one_sided: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of the true coefficients (name,value), intercept first.
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
    /// Run manifest JSON.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplicateArgs {
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = ReplicateInitKind::Random)]
    pub init: ReplicateInitKind,
    /// Standard deviation of random starting coefficients.
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    #[command(flatten)]
    pub ridge: RidgeArgs,
    /// Draw a fresh dataset per replication instead of reusing one.
    #[arg(long)]
    pub resample_data: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Summary JSON path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub p_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "zero,ridge,ga")]
    pub inits: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[command(flatten)]
    pub ridge: RidgeArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Run manifest JSON.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Add timing columns; cells then run one at a time.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// A fit report whose final objective should match the exact optimum.
    #[arg(long)]
    pub check: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,
    /// Result JSON path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
