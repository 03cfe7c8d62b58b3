//! Starting points for coordinate descent: zero, ridge, genetic search and
//! random multi-start.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LadError, Result};
use crate::model::{l1_norm, lad_objective, validate_dataset, Coefficients, Dataset, FitReport, FitResult, InitMethod, SolverConfig};
use crate::rng;
use crate::solver::optimized_cd;

pub fn zero_init(p: usize) -> Coefficients {
    Coefficients::zeros(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub lambda: f64,
    pub penalize_intercept: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            penalize_intercept: false,
        }
    }
}

/// Solves `(XᵀX + λD) β = Xᵀy` by Cholesky, where `D` is the identity with
/// the intercept slot zeroed unless `penalize_intercept` is set.
pub fn ridge_fit(d: &Dataset, cfg: &RidgeConfig) -> Result<Coefficients> {
    validate_dataset(d)?;
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(LadError::InvalidConfig(format!("ridge lambda must be >= 0, got {}", cfg.lambda)));
    }
    let p = d.p();
    let cols: Vec<&[f64]> = d.columns().collect();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let v: f64 = cols[a].iter().zip(cols[b]).map(|(x, y)| x * y).sum();
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
    }
    for j in 0..p {
        if cfg.penalize_intercept || !d.is_intercept(j) {
            gram[(j, j)] += cfg.lambda;
        }
    }
    let diag_max = (0..p).fold(0.0f64, |m, j| m.max(gram[(j, j)]));
    let rhs = DVector::from_vec(d.xt_mul(d.y()));
    let chol = gram.cholesky().ok_or(LadError::SingularSystem)?;
    let l = chol.l_dirty();
    if (0..p).any(|j| !(l[(j, j)] * l[(j, j)] > 1e-12 * diag_max)) {
        return Err(LadError::SingularSystem);
    }
    let beta = chol.solve(&rhs);
    Coefficients::new(beta.iter().copied().collect())
}

/// Genetic search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    /// Standard deviation of a coordinate mutation.
    pub mutation_scale: f64,
    pub crossover_rate: f64,
    /// `λ` in the fitness penalty `λ‖β₋₁‖²`.
    pub penalty_lambda: f64,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            mutation_rate: 0.1,
            mutation_scale: 0.5,
            crossover_rate: 0.9,
            penalty_lambda: 1e-3,
            elite_count: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if self.population < 2 {
            return Err(LadError::InvalidConfig("GA population must be at least 2".into()));
        }
        if self.generations == 0 {
            return Err(LadError::InvalidConfig("GA generations must be at least 1".into()));
        }
        if !prob(self.mutation_rate) || !prob(self.crossover_rate) {
            return Err(LadError::InvalidConfig("GA rates must lie in [0, 1]".into()));
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale.is_finite()) {
            return Err(LadError::InvalidConfig("GA mutation scale must be positive".into()));
        }
        if !(self.penalty_lambda >= 0.0 && self.penalty_lambda.is_finite()) {
            return Err(LadError::InvalidConfig("GA penalty must be >= 0".into()));
        }
        if self.elite_count >= self.population {
            return Err(LadError::InvalidConfig("GA elite count must be below the population".into()));
        }
        Ok(())
    }
}

/// `F(β) = −(1/n) Σ|y_i − x_iᵀβ| − λ Σ_{j ≠ intercept} β_j²`. Higher is fitter.
pub fn ga_fitness(d: &Dataset, beta: &[f64], lambda: f64, intercept_col: Option<usize>) -> Result<f64> {
    let mean_abs = lad_objective(d, beta)? / d.n() as f64;
    let penalty: f64 = beta
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != intercept_col)
        .map(|(_, b)| b * b)
        .sum();
    Ok(-mean_abs - lambda * penalty)
}

/// Result of a genetic search.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Coefficients,
    pub best_fitness: f64,
    /// Best fitness seen so far, after initialization and after each
    /// generation (`generations + 1` entries).
    pub history: Vec<f64>,
    /// Fitness of every generation-0 candidate.
    pub initial_fitness: Vec<f64>,
}

/// Fittest candidate found by the genetic search.
pub fn ga_search(d: &Dataset, cfg: &GaConfig) -> Result<Coefficients> {
    ga_search_traced(d, cfg).map(|o| o.best)
}

/// Genetic search with roulette selection on shifted fitness, uniform
/// crossover, Gaussian coordinate mutation and elitism.
pub fn ga_search_traced(d: &Dataset, cfg: &GaConfig) -> Result<GaOutcome> {
    validate_dataset(d)?;
    cfg.validate()?;
    let (m, p) = (cfg.population, d.p());
    let icpt = d.intercept_col();
    let mut rng = rng::stream(cfg.seed, "ga", 0);
    let fitness_of = |pop: &[Vec<f64>]| -> Result<Vec<f64>> {
        pop.iter().map(|b| ga_fitness(d, b, cfg.penalty_lambda, icpt)).collect()
    };

    let mut pop: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..p).map(|_| rng::standard_normal(&mut rng)).collect())
        .collect();
    let mut fit = fitness_of(&pop)?;
    let initial_fitness = fit.clone();
    let (mut best_idx, mut best_fit) = argmax(&fit);
    let mut best = pop[best_idx].clone();
    let mut history = vec![best_fit];

    for _ in 0..cfg.generations {
        // Rank by fitness, ties by index.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));

        let lo = fit.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        let weights: Vec<f64> = if range > 0.0 {
            fit.iter().map(|f| f - lo + 1e-9 * range).collect()
        } else {
            vec![1.0; m]
        };
        let total: f64 = weights.iter().sum();
        let pick = |rng: &mut dyn RngCore| -> usize {
            let target = rng::open_unit(rng) * total;
            let mut acc = 0.0;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if acc >= target {
                    return i;
                }
            }
            m - 1
        };

        let mut next: Vec<Vec<f64>> = order[..cfg.elite_count].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < m {
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let mut child = pop[a].clone();
            if rng::open_unit(&mut rng) < cfg.crossover_rate {
                for (c, &other) in child.iter_mut().zip(&pop[b]) {
                    if rng::open_unit(&mut rng) < 0.5 {
                        *c = other;
                    }
                }
            }
            for c in child.iter_mut() {
                if rng::open_unit(&mut rng) < cfg.mutation_rate {
                    *c += cfg.mutation_scale * rng::standard_normal(&mut rng);
                }
            }
            next.push(child);
        }
        pop = next;
        fit = fitness_of(&pop)?;
        let (gen_idx, gen_fit) = argmax(&fit);
        if gen_fit > best_fit {
            best_idx = gen_idx;
            best_fit = gen_fit;
            best = pop[best_idx].clone();
        }
        history.push(best_fit);
    }

    Ok(GaOutcome {
        best: Coefficients::new(best)?,
        best_fitness: best_fit,
        history,
        initial_fitness,
    })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
}

/// Random start `k`: i.i.d. `N(0, scale²)` coordinates from its own stream.
pub fn random_start(p: usize, seed: u64, k: u64, scale: f64) -> Coefficients {
    let mut rng = rng::stream(seed, "multistart", k);
    let beta = (0..p).map(|_| scale * rng::standard_normal(&mut rng)).collect();
    Coefficients::new(beta).expect("finite draws")
}

/// Runs [`optimized_cd`] from each of `starts` random starting points.
/// Fits are independent and may run in parallel; the output order follows
/// the start index.
pub fn multi_start_all(d: &Dataset, starts: usize, cfg: &SolverConfig, init_scale: f64) -> Result<Vec<FitResult>> {
    if starts == 0 {
        return Err(LadError::InvalidConfig("multi-start needs at least one start".into()));
    }
    if !(init_scale >= 0.0 && init_scale.is_finite()) {
        return Err(LadError::InvalidConfig("init scale must be >= 0".into()));
    }
    (0..starts)
        .into_par_iter()
        .map(|k| optimized_cd(d, &random_start(d.p(), cfg.seed, k as u64, init_scale), cfg))
        .collect()
}

/// Best of `starts` random-start fits; ties go to the lowest start index.
pub fn multi_start(d: &Dataset, starts: usize, cfg: &SolverConfig, init_scale: f64) -> Result<FitResult> {
    let fits = multi_start_all(d, starts, cfg, init_scale)?;
    let best = fits
        .iter()
        .enumerate()
        .fold(0, |bi, (i, f)| if f.final_objective < fits[bi].final_objective { i } else { bi });
    Ok(fits.into_iter().nth(best).expect("non-empty"))
}

/// How to choose the starting point of a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    Zero,
    Ridge(RidgeConfig),
    Ga(GaConfig),
    MultiStart { starts: usize, init_scale: f64 },
    User(Coefficients),
}

impl InitStrategy {
    pub fn method(&self) -> InitMethod {
        match self {
            Self::Zero => InitMethod::Zero,
            Self::Ridge(_) => InitMethod::Ridge,
            Self::Ga(_) => InitMethod::Ga,
            Self::MultiStart { .. } => InitMethod::Multistart,
            Self::User(_) => InitMethod::User,
        }
    }

    /// Starting coefficients; `None` for multi-start, which draws its own.
    pub fn start(&self, d: &Dataset) -> Result<Option<Coefficients>> {
        Ok(Some(match self {
            Self::Zero => zero_init(d.p()),
            Self::Ridge(cfg) => ridge_fit(d, cfg)?,
            Self::Ga(cfg) => ga_search(d, cfg)?,
            Self::User(beta) => {
                beta.check_len(d.p())?;
                beta.clone()
            }
            Self::MultiStart { .. } => return Ok(None),
        }))
    }
}

/// Initializes, refines with [`optimized_cd`] and reports training metrics.
pub fn fit(d: &Dataset, init: &InitStrategy, cfg: &SolverConfig) -> Result<FitReport> {
    let fit = match (init, init.start(d)?) {
        (_, Some(beta0)) => optimized_cd(d, &beta0, cfg)?,
        (InitStrategy::MultiStart { starts, init_scale }, None) => multi_start(d, *starts, cfg, *init_scale)?,
        _ => unreachable!("only multi-start draws its own starts"),
    };
    let n = d.n() as f64;
    let init_objective = fit.initial_objective;
    let mut metrics = BTreeMap::new();
    metrics.insert("train_mae".to_string(), l1_norm(&fit.residuals) / n);
    metrics.insert("init_train_mae".to_string(), init_objective / n);
    Ok(FitReport {
        fit,
        init_method: init.method(),
        init_objective,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> Dataset {
        Dataset::from_rows(&[vec![1.0], vec![1.0]], vec![2.0, 4.0], None).unwrap()
    }

    #[test]
    fn zero_init_examples() {
        assert_eq!(zero_init(3).as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(zero_init(1).as_slice(), &[0.0]);
        let d = Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], vec![-1.0, 2.5], None).unwrap();
        assert_eq!(lad_objective(&d, &zero_init(2)).unwrap(), 3.5);
    }

    #[test]
    fn ridge_examples() {
        let ols = RidgeConfig { lambda: 0.0, penalize_intercept: true };
        assert!((ridge_fit(&two_point(), &ols).unwrap()[0] - 3.0).abs() < 1e-14);
        let shrunk = RidgeConfig { lambda: 2.0, penalize_intercept: true };
        assert!((ridge_fit(&two_point(), &shrunk).unwrap()[0] - 1.5).abs() < 1e-14);

        let d = Dataset::from_rows(&[vec![1.0, 0.5], vec![1.0, -2.0], vec![1.0, 3.0]], vec![1.0, 7.0, -4.0], Some(0))
            .unwrap();
        let huge = RidgeConfig { lambda: 1e12, penalize_intercept: true };
        let beta = ridge_fit(&d, &huge).unwrap();
        let xty = d.xt_mul(d.y()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(beta.iter().all(|b| b.abs() <= 1e-6 * xty));
    }

    #[test]
    fn ridge_singular_without_penalty() {
        let d = Dataset::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0], None).unwrap();
        let cfg = RidgeConfig { lambda: 0.0, penalize_intercept: false };
        assert_eq!(ridge_fit(&d, &cfg), Err(LadError::SingularSystem));
        assert!(ridge_fit(&d, &RidgeConfig::default()).is_ok());
    }

    #[test]
    fn ga_fitness_examples() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0]], vec![3.0, 5.0], None).unwrap();
        assert_eq!(ga_fitness(&d, &[4.0], 0.0, None).unwrap(), -1.0);
        assert_eq!(ga_fitness(&d, &[4.0], 1.0, None).unwrap(), -17.0);
        assert_eq!(ga_fitness(&d, &[4.0], 1.0, Some(0)).unwrap(), -1.0);
        let exact = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![3.0, 6.0], None).unwrap();
        assert_eq!(ga_fitness(&exact, &[3.0], 0.0, None).unwrap(), 0.0);
        assert!(ga_fitness(&d, &[1.0, 2.0], 0.0, None).is_err());
    }

    #[test]
    fn ga_config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { population: 1, ..Default::default() }.validate().is_err());
        assert!(GaConfig { elite_count: 100, ..Default::default() }.validate().is_err());
        assert!(GaConfig { mutation_rate: 1.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn multi_start_requires_a_start() {
        assert!(multi_start(&two_point(), 0, &SolverConfig::default(), 1.0).is_err());
    }
}
