//! Exact univariate L1 minimizers.
//!
//! Both routines sort and scan cumulative weight, returning the *lower*
//! representative: the smallest value whose left mass reaches half the
//! total. Equal values are merged by the sort, so ties never depend on input
//! order.

use crate::error::{LadError, Result};

/// Values `z_i` with nonnegative weights `w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(LadError::DimensionMismatch {
                what: "weights vs values",
                expected: values.len(),
                found: weights.len(),
            });
        }
        if values.is_empty() {
            return Err(LadError::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LadError::NonFiniteValue { index: i });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(LadError::InvalidWeight {
                index: i,
                value: weights[i],
            });
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(LadError::ZeroTotalWeight);
        }
        Ok(Self { values, weights })
    }

    pub fn unit(values: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; values.len()];
        Self::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i |z_i − b|`.
    pub fn objective(&self, b: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * (z - b).abs())
            .sum()
    }
}

/// Lower median: the smallest `m` among the values with `#{v_i ≤ m} ≥ n/2`.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(LadError::EmptyInput);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(LadError::NonFiniteValue { index: i });
    }
    let mut sorted = values.to_vec();
    Ok(lower_median_in_place(&mut sorted))
}

/// Lower median of finite values; reorders `buf`.
pub(crate) fn lower_median_in_place(buf: &mut [f64]) -> f64 {
    debug_assert!(!buf.is_empty());
    buf.sort_unstable_by(f64::total_cmp);
    buf[buf.len().div_ceil(2) - 1]
}

/// Smallest value `b` with `Σ_{z_i ≤ b} w_i ≥ W/2`; zero weights are ignored.
pub fn weighted_median(s: &WeightedSample) -> Result<f64> {
    let mut pairs: Vec<(f64, f64)> = s
        .values
        .iter()
        .zip(&s.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&z, &w)| (z, w))
        .collect();
    if pairs.is_empty() {
        return Err(LadError::ZeroTotalWeight);
    }
    Ok(weighted_median_in_place(&mut pairs))
}

/// Weighted lower median of `(value, weight)` pairs with positive weights;
/// reorders `pairs`.
pub(crate) fn weighted_median_in_place(pairs: &mut [(f64, f64)]) -> f64 {
    debug_assert!(!pairs.is_empty());
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &(z, w) in pairs.iter() {
        cum += w;
        if cum >= half {
            return z;
        }
    }
    // Only reachable through rounding in `total`; the last value always
    // carries the full mass.
    pairs[pairs.len() - 1].0
}

/// Whether `b` satisfies both half-mass inequalities, with slack `1e-12·W`.
pub fn check_weighted_median(s: &WeightedSample, b: f64) -> bool {
    let total = s.total_weight();
    let (mut left, mut right) = (0.0, 0.0);
    for (&z, &w) in s.values.iter().zip(&s.weights) {
        if z <= b {
            left += w;
        }
        if z >= b {
            right += w;
        }
    }
    let need = 0.5 * total - 1e-12 * total;
    left >= need && right >= need
}
