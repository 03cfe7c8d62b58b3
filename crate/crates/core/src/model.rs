//! Data types shared by every solver: the design, coefficient vectors,
//! solver settings and fit results.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{LadError, Result};

/// Dense regression data. `X` is stored column-major so that a single
/// predictor column is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    intercept_col: Option<usize>,
}

impl Dataset {
    /// Builds a dataset from predictor columns. Validates all invariants.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        y: Vec<f64>,
        intercept_col: Option<usize>,
    ) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        let mut x = Vec::with_capacity(n * p);
        for col in &columns {
            if col.len() != n {
                return Err(LadError::DimensionMismatch {
                    what: "column length vs response length",
                    expected: n,
                    found: col.len(),
                });
            }
            x.extend_from_slice(col);
        }
        let d = Self {
            n,
            p,
            x,
            y,
            intercept_col,
        };
        validate_dataset(&d)?;
        Ok(d)
    }

    /// Builds a dataset from observation rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, intercept_col: Option<usize>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(LadError::DimensionMismatch {
                what: "row count vs response length",
                expected: y.len(),
                found: rows.len(),
            });
        }
        let p = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for row in rows {
            if row.len() != p {
                return Err(LadError::DimensionMismatch {
                    what: "row length",
                    expected: p,
                    found: row.len(),
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        if p == 0 {
            return Err(LadError::EmptyData { n: rows.len(), p });
        }
        Self::from_columns(columns, y, intercept_col)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn intercept_col(&self) -> Option<usize> {
        self.intercept_col
    }

    pub fn is_intercept(&self, j: usize) -> bool {
        self.intercept_col == Some(j)
    }

    /// Column `j` of the design.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[j * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.n)
    }

    /// `X β`.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (col, &b) in self.columns().zip(beta) {
            if b != 0.0 {
                for (o, &x) in out.iter_mut().zip(col) {
                    *o += x * b;
                }
            }
        }
        out
    }

    /// `y − X β`.
    pub fn residuals(&self, beta: &[f64]) -> Vec<f64> {
        let mut res = self.y.clone();
        for (col, &b) in self.columns().zip(beta) {
            if b != 0.0 {
                for (r, &x) in res.iter_mut().zip(col) {
                    *r -= x * b;
                }
            }
        }
        res
    }

    /// Same data with the response replaced.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n {
            return Err(LadError::DimensionMismatch {
                what: "response length",
                expected: self.n,
                found: y.len(),
            });
        }
        let d = Self { y, ..self.clone() };
        validate_dataset(&d)?;
        Ok(d)
    }

    /// Restriction to the given observation indices, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Self::from_columns(columns, y, self.intercept_col)
    }

    /// `‖y‖∞`.
    pub fn y_max_abs(&self) -> f64 {
        self.y.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Xᵀ v`.
    pub fn xt_mul(&self, v: &[f64]) -> Vec<f64> {
        self.columns().map(|c| dot(c, v)).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks the dataset invariants: non-empty, finite, and a true ones column
/// wherever an intercept is declared.
pub fn validate_dataset(d: &Dataset) -> Result<()> {
    if d.n == 0 || d.p == 0 {
        return Err(LadError::EmptyData { n: d.n, p: d.p });
    }
    if d.y.len() != d.n || d.x.len() != d.n * d.p {
        return Err(LadError::DimensionMismatch {
            what: "storage size",
            expected: d.n * d.p,
            found: d.x.len(),
        });
    }
    for (j, col) in d.columns().enumerate() {
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(LadError::NonFiniteEntry { row: i, col: j });
        }
    }
    if let Some(i) = d.y.iter().position(|v| !v.is_finite()) {
        return Err(LadError::NonFiniteResponse { row: i });
    }
    if let Some(c) = d.intercept_col {
        if c >= d.p {
            return Err(LadError::IndexOutOfRange { index: c, len: d.p });
        }
        if let Some((i, &v)) = d.col(c).iter().enumerate().find(|(_, &v)| v != 1.0) {
            return Err(LadError::BadInterceptColumn {
                col: c,
                row: i,
                value: v,
            });
        }
    }
    Ok(())
}

/// `Σ_i |y_i − x_iᵀβ|`.
pub fn lad_objective(d: &Dataset, beta: &[f64]) -> Result<f64> {
    if beta.len() != d.p {
        return Err(LadError::DimensionMismatch {
            what: "coefficient length",
            expected: d.p,
            found: beta.len(),
        });
    }
    Ok(l1_norm(&d.residuals(beta)))
}

pub(crate) fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|r| r.abs()).sum()
}

/// Coefficient vector, one slot per design column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if let Some(i) = beta.iter().position(|v| !v.is_finite()) {
            return Err(LadError::NonFiniteValue { index: i });
        }
        Ok(Self(beta))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Checks `len == p`.
    pub fn check_len(&self, p: usize) -> Result<()> {
        if self.0.len() == p {
            Ok(())
        } else {
            Err(LadError::DimensionMismatch {
                what: "coefficient length",
                expected: p,
                found: self.0.len(),
            })
        }
    }
}

impl Deref for Coefficients {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Coordinate descent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Upper bound on full sweeps.
    pub max_sweeps: usize,
    /// Stop once `(L_prev − L_new) / max(1, L_prev)` drops below this.
    pub tol: f64,
    /// Column entries with `|x_ij|` at or below this are treated as zero.
    pub zero_threshold: f64,
    /// Sweeps between full recomputations of the maintained residual.
    pub residual_refresh_every: usize,
    pub seed: u64,
    /// When the sweep rule stalls, look for a descent direction along an edge
    /// of the active set before declaring convergence. Disabling this gives
    /// plain cyclic coordinate descent.
    pub escape_stalls: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 500,
            tol: 1e-10,
            zero_threshold: 1e-12,
            residual_refresh_every: 50,
            seed: 0,
            escape_stalls: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(LadError::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(LadError::InvalidConfig(format!("tol must be >= 0, got {}", self.tol)));
        }
        if !(self.zero_threshold >= 0.0) || !self.zero_threshold.is_finite() {
            return Err(LadError::InvalidConfig(format!(
                "zero_threshold must be >= 0, got {}",
                self.zero_threshold
            )));
        }
        if self.residual_refresh_every == 0 {
            return Err(LadError::InvalidConfig(
                "residual_refresh_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Coefficients,
    /// `L(β₀)`, the objective at the starting point.
    pub initial_objective: f64,
    /// `L(β)` after each sweep.
    pub objective_trace: Vec<f64>,
    pub final_objective: f64,
    /// `y − Xβ` at exit.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
    /// Number of stall escapes taken.
    pub escapes: usize,
    /// Seconds for the whole run.
    pub wall_time: f64,
    /// Seconds per sweep.
    pub sweep_times: Vec<f64>,
}

impl FitResult {
    /// Largest single-sweep increase of the objective, including the step
    /// from the starting point. Non-positive for a monotone run.
    pub fn max_increase(&self) -> f64 {
        let mut prev = self.initial_objective;
        let mut worst = f64::NEG_INFINITY;
        for &v in &self.objective_trace {
            worst = worst.max(v - prev);
            prev = v;
        }
        worst
    }

    /// Monotone up to `1e-9·(1 + L(β₀))`.
    pub fn is_monotone(&self) -> bool {
        self.max_increase() <= 1e-9 * (1.0 + self.initial_objective)
    }

    /// `final_objective / n`.
    pub fn train_mae(&self) -> f64 {
        self.final_objective / self.residuals.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    Zero,
    Ridge,
    Ga,
    Multistart,
    User,
}

impl InitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Ridge => "ridge",
            Self::Ga => "ga",
            Self::Multistart => "multistart",
            Self::User => "user",
        }
    }
}

/// A fit together with how it was started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fit: FitResult,
    pub init_method: InitMethod,
    pub init_objective: f64,
    pub metrics: BTreeMap<String, f64>,
}
