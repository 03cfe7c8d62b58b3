//! Escaping coordinate-wise stationary points.
//!
//! Exact cyclic coordinate descent on `Σ|y_i − x_iᵀβ|` can stop at a point
//! where every axis direction is non-descending while some oblique direction
//! still descends: the objective is not separable, so coordinate-wise
//! optimality does not imply global optimality. At such a point several
//! residuals sit at zero (the active set). The directional derivative along
//! `d` is
//!
//! ```text
//! L'(β; d) = −gᵀd + Σ_{i active} |x_iᵀd|,   g = Σ_{i inactive} sign(r_i) x_i
//! ```
//!
//! and `β` is a global minimizer iff it is non-negative for every `d`. The
//! candidates examined here are the projection of `g` onto the null space of
//! the active rows, and the edges that release one active row while keeping
//! the others at zero. A negative derivative along a candidate yields a
//! descent direction; the exact minimizer along it is again a weighted
//! median, of `r_i / x_iᵀd` with weights `|x_iᵀd|`.

use crate::median::weighted_median_in_place;
use crate::model::{dot, l1_norm, Dataset};

/// Candidates tried per call, best directional derivative first.
const MAX_CANDIDATES: usize = 8;

/// A line-search step along a descent direction.
#[derive(Debug, Clone)]
pub struct DescentStep {
    pub direction: Vec<f64>,
    pub step: f64,
    /// `X · direction`.
    pub xd: Vec<f64>,
    /// Objective after the step.
    pub objective: f64,
}

/// Residuals at or below this magnitude are considered active.
pub fn active_tolerance(d: &Dataset) -> f64 {
    1e-9 * (1.0 + d.y_max_abs())
}

/// Searches for a step that lowers the objective by more than `min_gain`.
/// `None` certifies (up to tolerances) that `res = y − Xβ` is at a global
/// minimizer.
///
/// Near a kink that cyclic updates approach only geometrically the residuals
/// that should be active are small but not zero, so the active set is also
/// tried with looser thresholds relative to the mean absolute residual. The
/// line search always uses the exact objective.
pub fn find_descent_step(d: &Dataset, res: &[f64], min_gain: f64) -> Option<DescentStep> {
    let base = active_tolerance(d);
    let typical = l1_norm(res) / res.len().max(1) as f64;
    std::iter::once(base)
        .chain([1e-6, 1e-4, 1e-2].into_iter().map(|f| f * typical).filter(|&t| t > base))
        .find_map(|eps| descent_step_with(d, res, min_gain, eps))
}

fn descent_step_with(d: &Dataset, res: &[f64], min_gain: f64, eps: f64) -> Option<DescentStep> {
    let n = d.n();
    let p = d.p();
    let current = l1_norm(res);

    let active: Vec<usize> = (0..n).filter(|&i| res[i].abs() <= eps).collect();
    let signs: Vec<f64> = res
        .iter()
        .map(|&r| if r.abs() <= eps { 0.0 } else { r.signum() })
        .collect();
    let g = d.xt_mul(&signs);
    let g_norm = dot(&g, &g).sqrt();

    let rows: Vec<Vec<f64>> = active.iter().map(|&i| d.row(i)).collect();
    let basis = RowBasis::build(&rows, p);

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let projected_g = basis.project_out(&g);
    if dot(&projected_g, &projected_g).sqrt() > 1e-10 * (1.0 + g_norm) {
        candidates.push((f64::NEG_INFINITY, projected_g));
    }
    // Multipliers s with X_Bᵀ s = projection of g onto the active row space.
    let s = basis.multipliers(&g);
    let mut order: Vec<usize> = (0..s.len()).filter(|&m| s[m].abs() > 1.0).collect();
    order.sort_by(|&a, &b| s[b].abs().total_cmp(&s[a].abs()));
    for m in order.into_iter().take(MAX_CANDIDATES) {
        let mut dir = basis.release_direction(m);
        if s[m] < 0.0 {
            dir.iter_mut().for_each(|v| *v = -*v);
        }
        candidates.push((-s[m].abs(), dir));
    }
    if candidates.is_empty() {
        return None;
    }

    let threshold = -1e-10 * (1.0 + g_norm);
    let mut scored: Vec<(f64, Vec<f64>)> = candidates
        .into_iter()
        .filter_map(|(_, dir)| {
            let norm = dot(&dir, &dir).sqrt();
            if norm == 0.0 {
                return None;
            }
            let kink: f64 = rows.iter().map(|x| dot(x, &dir).abs()).sum();
            let deriv = (kink - dot(&g, &dir)) / norm;
            (deriv < threshold).then_some((deriv, dir))
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pairs = Vec::with_capacity(n);
    for (_, dir) in scored.into_iter().take(MAX_CANDIDATES) {
        let xd = d.predict(&dir);
        let scale = xd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        pairs.clear();
        pairs.extend(
            res.iter()
                .zip(&xd)
                .filter(|(_, a)| a.abs() > 1e-12 * scale)
                .map(|(&r, &a)| (r / a, a.abs())),
        );
        if pairs.is_empty() {
            continue;
        }
        let step = weighted_median_in_place(&mut pairs);
        if step == 0.0 {
            continue;
        }
        let objective: f64 = res.iter().zip(&xd).map(|(r, a)| (r - step * a).abs()).sum();
        if current - objective > min_gain {
            return Some(DescentStep {
                direction: dir,
                step,
                xd,
                objective,
            });
        }
    }
    None
}

/// Orthonormal basis `Q` of a maximal independent subset of the active rows,
/// with `X_B = L Q` for lower-triangular `L`.
struct RowBasis {
    q: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
}

impl RowBasis {
    fn build(rows: &[Vec<f64>], p: usize) -> Self {
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut l: Vec<Vec<f64>> = Vec::new();
        for row in rows {
            if q.len() == p {
                break;
            }
            let row_norm = dot(row, row).sqrt();
            if row_norm == 0.0 {
                continue;
            }
            let mut v = row.clone();
            let mut coeffs = Vec::with_capacity(q.len() + 1);
            for qm in &q {
                let c = dot(qm, &v);
                v.iter_mut().zip(qm).for_each(|(a, b)| *a -= c * b);
                coeffs.push(c);
            }
            // Second pass keeps the basis orthogonal to working precision.
            for (m, qm) in q.iter().enumerate() {
                let c = dot(qm, &v);
                v.iter_mut().zip(qm).for_each(|(a, b)| *a -= c * b);
                coeffs[m] += c;
            }
            let norm = dot(&v, &v).sqrt();
            if norm <= 1e-10 * row_norm {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= norm);
            coeffs.push(norm);
            q.push(v);
            l.push(coeffs);
        }
        Self { q, l }
    }

    fn project_out(&self, g: &[f64]) -> Vec<f64> {
        let mut out = g.to_vec();
        for qm in &self.q {
            let c = dot(qm, &out);
            out.iter_mut().zip(qm).for_each(|(a, b)| *a -= c * b);
        }
        out
    }

    /// Solves `Lᵀ s = Q g`.
    fn multipliers(&self, g: &[f64]) -> Vec<f64> {
        let k = self.q.len();
        let mut s: Vec<f64> = self.q.iter().map(|qm| dot(qm, g)).collect();
        for m in (0..k).rev() {
            for r in m + 1..k {
                s[m] -= self.l[r][m] * s[r];
            }
            s[m] /= self.l[m][m];
        }
        s
    }

    /// Direction `d = Qᵀ L⁻¹ e_m`: moves active row `m` by one unit and keeps
    /// the other basis rows at zero.
    fn release_direction(&self, m: usize) -> Vec<f64> {
        let k = self.q.len();
        let mut u = vec![0.0; k];
        u[m] = 1.0 / self.l[m][m];
        for r in m + 1..k {
            let acc: f64 = (m..r).map(|c| self.l[r][c] * u[c]).sum();
            u[r] = -acc / self.l[r][r];
        }
        let p = self.q.first().map_or(0, Vec::len);
        let mut d = vec![0.0; p];
        for (qm, &um) in self.q.iter().zip(&u) {
            if um != 0.0 {
                d.iter_mut().zip(qm).for_each(|(a, b)| *a += um * b);
            }
        }
        d
    }
}
