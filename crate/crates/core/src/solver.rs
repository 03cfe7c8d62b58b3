//! Coordinate descent for least absolute deviations.
//!
//! Each coordinate subproblem `min_t Σ_i |r_i − x_ij t|` is solved exactly by
//! a weighted median of the ratios `r_i / x_ij` with weights `|x_ij|` (an
//! ordinary median for the intercept). Two drivers share the same update
//! rule: [`naive_cd`] rebuilds the partial residual from scratch for every
//! coordinate, [`optimized_cd`] maintains `y − Xβ` and patches it in place.
//! Both visit coordinates in index order and produce the same iterates.

use std::time::Instant;

use crate::error::{LadError, Result};
use crate::median::{check_weighted_median, lower_median_in_place, weighted_median_in_place, WeightedSample};
use crate::model::{l1_norm, validate_dataset, Coefficients, Dataset, FitResult, SolverConfig};
use crate::stall::{active_tolerance, find_descent_step};

/// The residual `y − Xβ` for the current iterate.
///
/// Stored as an unevaluated sum `hi + lo` with error-free products, so the
/// in-place updates accumulate no visible rounding and `hi` is (almost
/// always) the correctly rounded residual. Weighted-median selection can
/// amplify tiny perturbations sweep over sweep; keeping the residual exact
/// makes the incremental and from-scratch drivers see identical inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualState {
    res: Vec<f64>,
    lo: Vec<f64>,
}

impl ResidualState {
    pub fn new(d: &Dataset, beta: &[f64]) -> Self {
        let mut state = Self {
            res: Vec::new(),
            lo: Vec::new(),
        };
        state.refresh(d, beta);
        state
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.res
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.res
    }

    /// Recomputes from scratch.
    pub fn refresh(&mut self, d: &Dataset, beta: &[f64]) {
        self.res.clear();
        self.res.extend_from_slice(d.y());
        self.lo.clear();
        self.lo.resize(d.n(), 0.0);
        for (col, &b) in d.columns().zip(beta) {
            if b != 0.0 {
                for ((h, l), &x) in self.res.iter_mut().zip(self.lo.iter_mut()).zip(col) {
                    add_product(h, l, x, -b);
                }
            }
        }
    }

    /// `res ← res − col·delta`.
    pub fn apply_delta(&mut self, col: &[f64], delta: f64) {
        if delta != 0.0 {
            for ((h, l), &x) in self.res.iter_mut().zip(self.lo.iter_mut()).zip(col) {
                add_product(h, l, x, -delta);
            }
        }
    }

    /// `res ← res − col·(new − old)` without rounding `new − old`.
    fn replace_coefficient(&mut self, col: &[f64], old: f64, new: f64) {
        if old != new {
            for ((h, l), &x) in self.res.iter_mut().zip(self.lo.iter_mut()).zip(col) {
                add_product(h, l, x, -new);
                add_product(h, l, x, old);
            }
        }
    }

    /// `‖res − (y − Xβ)‖∞`.
    pub fn drift(&self, d: &Dataset, beta: &[f64]) -> f64 {
        self.res
            .iter()
            .zip(d.residuals(beta))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn objective(&self) -> f64 {
        l1_norm(&self.res)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `hi + lo ← hi + lo + a·b`, renormalized so that `hi = fl(hi + lo)`.
#[inline]
fn add_product(hi: &mut f64, lo: &mut f64, a: f64, b: f64) {
    let p = a * b;
    let pe = a.mul_add(b, -p);
    let (s, e) = two_sum(*hi, p);
    let (h, l) = two_sum(s, *lo + e + pe);
    *hi = h;
    *lo = l;
}

/// `r^(j) = res + X_j β_j`, leaving `state` untouched.
pub fn partial_residual(state: &ResidualState, d: &Dataset, j: usize, beta_j: f64) -> Result<Vec<f64>> {
    if j >= d.p() {
        return Err(LadError::IndexOutOfRange { index: j, len: d.p() });
    }
    let mut out = Vec::with_capacity(d.n());
    restore_into(state, d.col(j), beta_j, &mut out);
    Ok(out)
}

fn restore_into(state: &ResidualState, col: &[f64], beta_j: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(state.res.iter().zip(&state.lo).zip(col).map(|((&h, &l), &x)| {
        let (mut h, mut l) = (h, l);
        add_product(&mut h, &mut l, x, beta_j);
        h
    }));
}

/// Exact minimizer of `Σ_i |r_i − col_i t|` over `t`.
///
/// Entries with `|col_i| ≤ zero_threshold` do not depend on `t` and are
/// dropped; if nothing remains the coefficient is unidentifiable and
/// [`LadError::AllZeroColumn`] is returned.
pub fn coordinate_update(r: &[f64], col: &[f64], is_intercept: bool, zero_threshold: f64) -> Result<f64> {
    if r.len() != col.len() {
        return Err(LadError::DimensionMismatch {
            what: "column vs residual length",
            expected: r.len(),
            found: col.len(),
        });
    }
    if r.is_empty() {
        return Err(LadError::EmptyInput);
    }
    update_with(r, col, is_intercept, zero_threshold, &mut Scratch::default())
}

/// Buffers reused across coordinate updates.
#[derive(Debug, Default)]
struct Scratch {
    pairs: Vec<(f64, f64)>,
    values: Vec<f64>,
    partial: Vec<f64>,
    lo: Vec<f64>,
}

fn update_with(r: &[f64], col: &[f64], is_intercept: bool, zero_threshold: f64, scratch: &mut Scratch) -> Result<f64> {
    if is_intercept {
        scratch.values.clear();
        scratch.values.extend_from_slice(r);
        return Ok(lower_median_in_place(&mut scratch.values));
    }
    scratch.pairs.clear();
    scratch.pairs.extend(
        r.iter()
            .zip(col)
            .filter(|(_, x)| x.abs() > zero_threshold)
            .map(|(&ri, &x)| (ri / x, x.abs())),
    );
    if scratch.pairs.is_empty() {
        return Err(LadError::AllZeroColumn);
    }
    Ok(weighted_median_in_place(&mut scratch.pairs))
}

/// Snapshot handed to sweep observers.
#[derive(Debug, Clone, Copy)]
pub struct SweepInfo<'a> {
    /// 1-based sweep index.
    pub sweep: usize,
    pub beta: &'a [f64],
    pub objective: f64,
    /// Whether a stall escape was taken at the end of this sweep.
    pub escaped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Naive,
    Optimized,
}

/// Cyclic coordinate descent recomputing every partial residual from scratch,
/// `O(n p²)` per sweep.
pub fn naive_cd(d: &Dataset, beta0: &Coefficients, cfg: &SolverConfig) -> Result<FitResult> {
    run(Variant::Naive, d, beta0, cfg, &mut |_| {})
}

/// [`naive_cd`] with a callback after every sweep.
pub fn naive_cd_observed(
    d: &Dataset,
    beta0: &Coefficients,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SweepInfo<'_>),
) -> Result<FitResult> {
    run(Variant::Naive, d, beta0, cfg, observer)
}

/// Cyclic coordinate descent with an incrementally maintained residual,
/// `O(p n log n)` per sweep.
pub fn optimized_cd(d: &Dataset, beta0: &Coefficients, cfg: &SolverConfig) -> Result<FitResult> {
    run(Variant::Optimized, d, beta0, cfg, &mut |_| {})
}

/// [`optimized_cd`] with a callback after every sweep.
pub fn optimized_cd_observed(
    d: &Dataset,
    beta0: &Coefficients,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SweepInfo<'_>),
) -> Result<FitResult> {
    run(Variant::Optimized, d, beta0, cfg, observer)
}

/// Relative per-sweep decrease below which a joint descent step is tried.
const SLOW_PROGRESS: f64 = 1e-4;

fn run(
    variant: Variant,
    d: &Dataset,
    beta0: &Coefficients,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SweepInfo<'_>),
) -> Result<FitResult> {
    validate_dataset(d)?;
    cfg.validate()?;
    beta0.check_len(d.p())?;

    let start = Instant::now();
    let (n, p) = (d.n(), d.p());
    let mut beta = beta0.to_vec();
    let mut state = ResidualState::new(d, &beta);
    let initial_objective = state.objective();
    let mut scratch = Scratch::default();

    let mut trace = Vec::new();
    let mut sweep_times = Vec::new();
    let mut prev = initial_objective;
    let mut converged = false;
    let mut escapes = 0;

    for sweep in 1..=cfg.max_sweeps {
        let sweep_start = Instant::now();
        for j in 0..p {
            let col = d.col(j);
            let mut partial = std::mem::take(&mut scratch.partial);
            match variant {
                Variant::Naive => naive_partial(d, &beta, j, &mut partial, &mut scratch.lo),
                Variant::Optimized => restore_into(&state, col, beta[j], &mut partial),
            }
            let updated = update_with(&partial, col, d.is_intercept(j), cfg.zero_threshold, &mut scratch);
            scratch.partial = partial;
            let new_bj = match updated {
                Ok(v) => v,
                Err(LadError::AllZeroColumn) => continue,
                Err(e) => return Err(e),
            };
            if variant == Variant::Optimized {
                state.replace_coefficient(col, beta[j], new_bj);
            }
            beta[j] = new_bj;
        }

        match variant {
            Variant::Naive => state.refresh(d, &beta),
            Variant::Optimized if sweep % cfg.residual_refresh_every == 0 => state.refresh(d, &beta),
            Variant::Optimized => {}
        }
        let mut objective = state.objective();
        sweep_times.push(sweep_start.elapsed().as_secs_f64());

        // Cyclic updates can stop at, or crawl along a narrow valley towards,
        // a point that is optimal in every coordinate but not jointly. On slow
        // sweeps a joint descent step through the interpolated rows is tried
        // and kept when it beats what the sweep itself achieved.
        let gain = prev - objective;
        let stalled = gain / prev.max(1.0) < cfg.tol;
        let slow = gain / prev.max(1.0) < SLOW_PROGRESS;
        let mut escaped = false;
        if cfg.escape_stalls && (stalled || slow) {
            let min_gain = (cfg.tol.max(1e-13) * objective.max(1.0)).max(gain);
            if let Some(step) = find_descent_step(d, &state.res, min_gain) {
                for (b, v) in beta.iter_mut().zip(&step.direction) {
                    *b += step.step * v;
                }
                state.refresh(d, &beta);
                objective = state.objective();
                escapes += 1;
                escaped = true;
            }
        }
        if stalled && !escaped {
            converged = true;
        }

        trace.push(objective);
        observer(&SweepInfo {
            sweep,
            beta: &beta,
            objective,
            escaped,
        });
        prev = objective;
        if converged {
            break;
        }
    }

    debug_assert_eq!(state.res.len(), n);
    Ok(FitResult {
        beta: Coefficients::new(beta)?,
        initial_objective,
        sweeps_used: trace.len(),
        final_objective: prev,
        objective_trace: trace,
        residuals: state.into_vec(),
        converged,
        escapes,
        wall_time: start.elapsed().as_secs_f64(),
        sweep_times,
    })
}

/// `r^(j) = y − Σ_{k≠j} X_k β_k`, accumulated with the same compensated
/// arithmetic as [`ResidualState`].
fn naive_partial(d: &Dataset, beta: &[f64], j: usize, out: &mut Vec<f64>, lo: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(d.y());
    lo.clear();
    lo.resize(d.n(), 0.0);
    for (k, col) in d.columns().enumerate() {
        if k != j && beta[k] != 0.0 {
            for ((h, l), &x) in out.iter_mut().zip(lo.iter_mut()).zip(col) {
                add_product(h, l, x, -beta[k]);
            }
        }
    }
}

/// For each coordinate, whether `β_j` satisfies the half-mass conditions of
/// its own subproblem at the current `β`. Columns with no entry above the
/// threshold are reported optimal (the objective does not depend on them).
///
/// Observations whose residual is within the active tolerance are treated as
/// lying exactly at `β_j`, which absorbs the rounding left by the update
/// that zeroed them.
pub fn coordinate_optimality_check(d: &Dataset, beta: &Coefficients, zero_threshold: f64) -> Result<Vec<bool>> {
    validate_dataset(d)?;
    beta.check_len(d.p())?;
    let res = d.residuals(beta);
    let eps = active_tolerance(d);
    let mut out = Vec::with_capacity(d.p());
    for (j, col) in d.columns().enumerate() {
        let bj = beta[j];
        let (mut values, mut weights) = (Vec::new(), Vec::new());
        for (&r, &x) in res.iter().zip(col) {
            let w = if d.is_intercept(j) { 1.0 } else { x.abs() };
            if !d.is_intercept(j) && w <= zero_threshold {
                continue;
            }
            let z = if r.abs() <= eps { bj } else { bj + r / x };
            values.push(z);
            weights.push(w);
        }
        if values.is_empty() {
            out.push(true);
            continue;
        }
        let sample = WeightedSample::new(values, weights)?;
        out.push(check_weighted_median(&sample, bj));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Dataset {
        Dataset::from_rows(
            &[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]],
            vec![0.0, 1.0, 5.0],
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn partial_residual_examples() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0]], vec![1.0, 2.0], None).unwrap();
        let state = ResidualState { res: vec![0.0, 0.0], lo: vec![0.0; 2] };
        assert_eq!(partial_residual(&state, &d, 0, 2.0).unwrap(), vec![2.0, 2.0]);

        let zero_col = Dataset::from_rows(&[vec![0.0], vec![0.0]], vec![1.0, -1.0], None).unwrap();
        let state = ResidualState { res: vec![1.0, -1.0], lo: vec![0.0; 2] };
        assert_eq!(partial_residual(&state, &zero_col, 0, 5.0).unwrap(), vec![1.0, -1.0]);

        let state = ResidualState::new(&d, &[1.0]);
        assert_eq!(state.as_slice(), &[0.0, 1.0]);
        assert_eq!(partial_residual(&state, &d, 0, 1.0).unwrap(), vec![1.0, 2.0]);
        assert!(matches!(
            partial_residual(&state, &d, 3, 1.0),
            Err(LadError::IndexOutOfRange { index: 3, len: 1 })
        ));
    }

    #[test]
    fn coordinate_update_examples() {
        assert_eq!(coordinate_update(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], true, 1e-12).unwrap(), 2.0);
        // z = [2, 2, 5], w = [1, 2, 2]; cumulative weight 3 ≥ 2.5 at z = 2.
        assert_eq!(coordinate_update(&[2.0, 4.0, 10.0], &[1.0, 2.0, 2.0], false, 1e-12).unwrap(), 2.0);
        assert_eq!(
            coordinate_update(&[7.0, 7.0], &[0.0, 0.0], false, 1e-12),
            Err(LadError::AllZeroColumn)
        );
        // Entries at the threshold are dropped.
        assert_eq!(coordinate_update(&[1.0, 100.0], &[1.0, 1e-13], false, 1e-12).unwrap(), 1.0);
        assert!(coordinate_update(&[1.0], &[1.0, 2.0], false, 0.0).is_err());
    }

    #[test]
    fn fixture_reaches_oracle_value() {
        for f in [naive_cd, optimized_cd] {
            let fit = f(&fixture(), &Coefficients::zeros(2), &SolverConfig::default()).unwrap();
            assert!((fit.final_objective - 1.5).abs() < 1e-12, "{}", fit.final_objective);
            assert!((fit.beta[0]).abs() < 1e-12 && (fit.beta[1] - 2.5).abs() < 1e-12, "{:?}", fit.beta);
            assert!(fit.converged);
            assert!(fit.is_monotone());
        }
    }

    #[test]
    fn single_point() {
        let d = Dataset::from_rows(&[vec![2.0]], vec![6.0], None).unwrap();
        for f in [naive_cd, optimized_cd] {
            let fit = f(&d, &Coefficients::zeros(1), &SolverConfig::default()).unwrap();
            assert_eq!(fit.beta.as_slice(), &[3.0]);
            assert_eq!(fit.objective_trace[0], 0.0);
            assert_eq!(fit.final_objective, 0.0);
        }
    }

    #[test]
    fn zero_column_is_left_alone() {
        let d = Dataset::from_rows(
            &[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]],
            vec![1.0, 2.0, 4.0],
            Some(0),
        )
        .unwrap();
        let beta0 = Coefficients::new(vec![0.0, 7.0]).unwrap();
        let fit = optimized_cd(&d, &beta0, &SolverConfig::default()).unwrap();
        assert_eq!(fit.beta.as_slice(), &[2.0, 7.0]);
        assert_eq!(coordinate_optimality_check(&d, &fit.beta, 1e-12).unwrap(), vec![true, true]);
    }

    #[test]
    fn optimality_check_examples() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0], vec![1.0]], vec![0.0, 1.0, 2.0], Some(0)).unwrap();
        let at = |b: f64| coordinate_optimality_check(&d, &Coefficients::new(vec![b]).unwrap(), 1e-12).unwrap();
        assert_eq!(at(1.0), vec![true]);
        assert_eq!(at(0.0), vec![false]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = fixture();
        assert!(optimized_cd(&d, &Coefficients::zeros(3), &SolverConfig::default()).is_err());
        let cfg = SolverConfig { residual_refresh_every: 0, ..Default::default() };
        assert!(naive_cd(&d, &Coefficients::zeros(2), &cfg).is_err());
    }

    #[test]
    fn max_sweeps_bounds_the_run() {
        let cfg = SolverConfig { max_sweeps: 3, tol: 0.0, ..Default::default() };
        let fit = optimized_cd(&fixture(), &Coefficients::zeros(2), &cfg).unwrap();
        assert_eq!(fit.sweeps_used, 3);
        assert_eq!(fit.objective_trace.len(), 3);
        assert!(!fit.converged);
    }
}
