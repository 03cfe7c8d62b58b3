//! Reference solvers used to certify the coordinate-descent results.
//!
//! Some LAD minimizer always interpolates `p` observations (a vertex of the
//! underlying linear program), so for tiny instances the optimum can be found
//! by solving every nonsingular `p × p` interpolation system.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LadError, Result};
use crate::model::{lad_objective, validate_dataset, Coefficients, Dataset};

/// Enumeration budget beyond the `n ≤ 30, p ≤ 3` regime.
pub const MAX_SUBSETS: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub beta: Coefficients,
    pub objective: f64,
    /// Observations interpolated by `beta`.
    pub support: Vec<usize>,
    /// No other vertex within `1e-9` of the optimum has a different `β`.
    pub unique: bool,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Whether [`exact_lad_small`] accepts an `n × p` instance.
pub fn within_oracle_bounds(n: usize, p: usize) -> bool {
    (n <= 30 && p <= 3) || binomial(n, p) <= MAX_SUBSETS
}

/// Exact LAD fit by enumerating all `p`-subsets of observations.
pub fn exact_lad_small(d: &Dataset) -> Result<OracleSolution> {
    validate_dataset(d)?;
    let (n, p) = (d.n(), d.p());
    if !within_oracle_bounds(n, p) {
        return Err(LadError::TooLarge { n, p });
    }

    let tie = |best: f64| 1e-12 * (1.0 + best.abs());
    let near = |best: f64| 1e-9 * (1.0 + best.abs());

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    // Vertices within `near` of the running best, for the uniqueness flag.
    let mut contenders: Vec<(f64, Vec<f64>)> = Vec::new();

    let mut subset: Vec<usize> = (0..p).collect();
    if p <= n {
        loop {
            if let Some(beta) = interpolate(d, &subset) {
                let obj = lad_objective(d, &beta)?;
                let improves = best.as_ref().is_none_or(|(b, _, _)| obj < b - tie(*b));
                if improves {
                    best = Some((obj, subset.clone(), beta.clone()));
                    contenders.retain(|(o, _)| *o <= obj + near(obj));
                }
                if let Some((b, _, _)) = &best {
                    if obj <= b + near(*b) {
                        contenders.push((obj, beta));
                    }
                }
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }

    let (objective, support, beta) = best.ok_or(LadError::RankDeficient { p })?;
    let scale = 1e-9 * (1.0 + beta.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let unique = contenders
        .iter()
        .filter(|(o, _)| *o <= objective + near(objective))
        .all(|(_, b)| b.iter().zip(&beta).all(|(x, y)| (x - y).abs() <= scale));
    Ok(OracleSolution {
        beta: Coefficients::new(beta)?,
        objective,
        support,
        unique,
    })
}

/// Advances to the next lexicographic `k`-subset of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves `X_S β = y_S`, or `None` when `|det X_S| ≤ 1e-12·Π‖row‖`.
fn interpolate(d: &Dataset, rows: &[usize]) -> Option<Vec<f64>> {
    let p = d.p();
    let a = DMatrix::from_fn(p, p, |r, c| d.get(rows[r], c));
    let scale: f64 = (0..p).map(|r| a.row(r).norm()).product();
    let lu = a.lu();
    if !(lu.determinant().abs() > 1e-12 * scale) {
        return None;
    }
    let b = DVector::from_iterator(p, rows.iter().map(|&i| d.y()[i]));
    lu.solve(&b).map(|v| v.iter().copied().collect())
}

/// Ordinary least squares via Householder QR of `X`.
pub fn ols_fit(d: &Dataset) -> Result<Coefficients> {
    validate_dataset(d)?;
    let (n, p) = (d.n(), d.p());
    if n < p {
        return Err(LadError::SingularSystem);
    }
    let x = DMatrix::from_fn(n, p, |i, j| d.get(i, j));
    let y = DVector::from_column_slice(d.y());
    let qr = x.qr();
    let r = qr.r();
    let rmax = (0..p).fold(0.0f64, |m, j| m.max(r[(j, j)].abs()));
    if (0..p).any(|j| !(r[(j, j)].abs() > 1e-12 * rmax)) {
        return Err(LadError::SingularSystem);
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(LadError::SingularSystem)?;
    Coefficients::new(beta.iter().copied().collect())
}
