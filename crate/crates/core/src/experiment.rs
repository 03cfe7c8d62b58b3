//! Repeated-fit studies on synthetic data: replication of a single design
//! and a timing grid over the number of predictors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_synthetic, mae, SynthSpec};
use crate::error::{LadError, Result};
use crate::init::{ga_search, ridge_fit, zero_init, GaConfig, RidgeConfig};
use crate::model::{lad_objective, Coefficients, FitResult, SolverConfig};
use crate::rng;
use crate::solver::optimized_cd;

/// Starting point used by each replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ReplicateInit {
    /// Fresh `N(0, scale²)` coordinates per replication.
    Random { scale: f64 },
    Zero,
    Ridge(RidgeConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateConfig {
    pub reps: usize,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub init: ReplicateInit,
    /// Draw a new dataset per replication instead of reusing one.
    pub resample_data: bool,
    pub seed: u64,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    /// Mean absolute training residual at the fitted coefficients.
    pub final_mae: f64,
    pub param_mae: f64,
    pub final_objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// No sweep raised the objective beyond rounding.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub reps: Vec<RepOutcome>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single replication).
    pub sd: f64,
    pub cv: f64,
    pub q05: f64,
    pub q95: f64,
    pub mean_param_mae: f64,
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(reps: Vec<RepOutcome>) -> ReplicateSummary {
    let k = reps.len() as f64;
    let maes: Vec<f64> = reps.iter().map(|r| r.final_mae).collect();
    let mean = maes.iter().sum::<f64>() / k;
    let sd = if reps.len() > 1 {
        (maes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = maes.clone();
    sorted.sort_by(f64::total_cmp);
    ReplicateSummary {
        mean,
        sd,
        cv: if mean != 0.0 { sd / mean } else { 0.0 },
        q05: quantile(&sorted, 0.05),
        q95: quantile(&sorted, 0.95),
        mean_param_mae: reps.iter().map(|r| r.param_mae).sum::<f64>() / k,
        reps,
    }
}

/// Runs `reps` independent fits and summarizes their final training MAE.
/// Each replication owns its seed streams, so results do not depend on
/// scheduling.
pub fn replicate(cfg: &ReplicateConfig) -> Result<ReplicateSummary> {
    if cfg.reps == 0 {
        return Err(LadError::InvalidConfig("at least one replication is required".into()));
    }
    let shared = if cfg.resample_data {
        None
    } else {
        Some(generate_synthetic(&SynthSpec::new(cfg.n, cfg.p, cfg.sigma, cfg.seed))?)
    };
    let outcomes: Result<Vec<RepOutcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let (d, truth) = match &shared {
                Some(pair) => pair.clone(),
                None => {
                    let seed = rng::derive_seed(cfg.seed, "replicate-data", r as u64);
                    generate_synthetic(&SynthSpec::new(cfg.n, cfg.p, cfg.sigma, seed))?
                }
            };
            let beta0 = match &cfg.init {
                ReplicateInit::Random { scale } => {
                    let mut g = rng::stream(cfg.seed, "replicate-init", r as u64);
                    Coefficients::new((0..d.p()).map(|_| scale * rng::standard_normal(&mut g)).collect())?
                }
                ReplicateInit::Zero => zero_init(d.p()),
                ReplicateInit::Ridge(rc) => ridge_fit(&d, rc)?,
            };
            let fit = optimized_cd(&d, &beta0, &cfg.solver)?;
            Ok(RepOutcome {
                final_mae: fit.train_mae(),
                param_mae: mae(&fit.beta, &truth)?,
                final_objective: fit.final_objective,
                sweeps: fit.sweeps_used,
                converged: fit.converged,
                monotone: fit.is_monotone(),
            })
        })
        .collect();
    Ok(summarize(outcomes?))
}

/// Initializer evaluated in a timing cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchInit {
    Zero,
    Ridge,
    Ga,
}

impl BenchInit {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Ridge => "ridge",
            Self::Ga => "ga",
        }
    }
}

impl std::str::FromStr for BenchInit {
    type Err = LadError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(Self::Zero),
            "ridge" => Ok(Self::Ridge),
            "ga" => Ok(Self::Ga),
            other => Err(LadError::InvalidConfig(format!("unknown initializer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n: usize,
    pub p_grid: Vec<usize>,
    pub inits: Vec<BenchInit>,
    pub sigma: f64,
    pub seed: u64,
    pub solver: SolverConfig,
    pub ridge: RidgeConfig,
    pub ga: GaConfig,
}

/// One `(p, initializer)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub p: usize,
    pub init: BenchInit,
    /// Training MAE at the starting point.
    pub init_mae: f64,
    pub train_mae: f64,
    pub objective: f64,
    /// `MAE(y − Xβ_true)`.
    pub best_mae: f64,
    pub param_mae: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub escapes: usize,
    /// Seconds spent producing the starting point.
    pub init_time: f64,
    /// Seconds in the coordinate-descent refinement.
    pub wall_time: f64,
    /// Median seconds per sweep.
    pub sec_per_sweep: f64,
}

pub fn median_sweep_time(fit: &FitResult) -> f64 {
    let mut t = fit.sweep_times.clone();
    if t.is_empty() {
        return 0.0;
    }
    t.sort_by(f64::total_cmp);
    quantile(&t, 0.5)
}

fn bench_cell(cfg: &BenchConfig, p: usize, init: BenchInit) -> Result<BenchRow> {
    let seed = rng::derive_seed(cfg.seed, "bench-data", p as u64);
    let (d, truth) = generate_synthetic(&SynthSpec::new(cfg.n, p, cfg.sigma, seed))?;
    let clock = std::time::Instant::now();
    let beta0 = match init {
        BenchInit::Zero => zero_init(d.p()),
        BenchInit::Ridge => ridge_fit(&d, &cfg.ridge)?,
        BenchInit::Ga => ga_search(&d, &GaConfig { seed, ..cfg.ga.clone() })?,
    };
    let init_time = clock.elapsed().as_secs_f64();
    let n = d.n() as f64;
    let fit = optimized_cd(&d, &beta0, &cfg.solver)?;
    Ok(BenchRow {
        n: d.n(),
        p,
        init,
        init_mae: lad_objective(&d, &beta0)? / n,
        train_mae: fit.train_mae(),
        objective: fit.final_objective,
        best_mae: lad_objective(&d, &truth)? / n,
        param_mae: mae(&fit.beta, &truth)?,
        sweeps: fit.sweeps_used,
        converged: fit.converged,
        escapes: fit.escapes,
        init_time,
        wall_time: fit.wall_time,
        sec_per_sweep: median_sweep_time(&fit),
    })
}

/// Every `(p, init)` cell, ordered by grid position then initializer.
/// `parallel` runs cells concurrently, which skews their timings.
pub fn bench(cfg: &BenchConfig, parallel: bool) -> Result<Vec<BenchRow>> {
    let cells: Vec<(usize, BenchInit)> = cfg
        .p_grid
        .iter()
        .flat_map(|&p| cfg.inits.iter().map(move |&i| (p, i)))
        .collect();
    if parallel {
        cells.par_iter().map(|&(p, i)| bench_cell(cfg, p, i)).collect()
    } else {
        cells.iter().map(|&(p, i)| bench_cell(cfg, p, i)).collect()
    }
}
