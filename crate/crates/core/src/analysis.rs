//! Closed-form Bloom filter model and empirical error accounting.
//!
//! All formulas use the exact product form `(1 - 1/m)^(kn)` rather than the
//! familiar `e^(-kn/m)` approximation. The two agree to within `1e-4` in the
//! false-positive rate once `m >= 1e4`, but the exact form keeps small-filter
//! tests free of approximation error.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::Key;

/// Probability that a given bit is still 0 after `n` insertions.
pub fn analytic_p0(m: usize, n: usize, k: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let draws = k as f64 * n as f64;
    (draws * (-1.0 / m as f64).ln_1p()).exp()
}

/// Probability that a given bit is set after `n` insertions.
pub fn analytic_p1(m: usize, n: usize, k: u32) -> f64 {
    1.0 - analytic_p0(m, n, k)
}

/// False-positive rate `p_1^k`.
pub fn analytic_fpr(m: usize, n: usize, k: u32) -> f64 {
    analytic_p1(m, n, k).powi(k as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalK {
    /// `m ln 2 / n`.
    pub real: f64,
    /// Nearest integer, at least 1.
    pub rounded: u32,
}

pub fn optimal_k(m: usize, n: usize) -> OptimalK {
    let real = m as f64 * std::f64::consts::LN_2 / n as f64;
    OptimalK {
        real,
        rounded: (real.round() as u32).max(1),
    }
}

/// Lowest attainable false-positive rate at `m/n` bits per element,
/// `(1/2)^(m ln 2 / n)`, roughly `0.6185^(m/n)`.
pub fn min_fpr(m: usize, n: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    0.5f64.powf(optimal_k(m, n).real)
}

/// Probability `r_s` that a positive survives the random clearing of `s` of
/// the `p1 * m` set bits.
pub fn retention(s: f64, p1: f64, m: usize, k: u32) -> Result<f64> {
    let set = p1 * m as f64;
    if s < 0.0 || s > set * (1.0 + 1e-12) {
        return Err(Error::RetentionDomain { s, limit: set });
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let frac = (1.0 - s / set).max(0.0);
    Ok(frac.powi(k as i32))
}

/// Error proportions before and after a clearing pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `f_P' = |F_P'| / |U - A|`.
    pub fp_proportion: f64,
    /// `f_N' = |F_N'| / |A|`.
    pub fn_proportion: f64,
    pub delta_fp: f64,
    pub delta_fn: f64,
    /// `None` when no false negative was generated.
    pub chi: Option<f64>,
    /// `|B| / |F_P|`.
    pub beta: f64,
    pub false_positives_before: usize,
    pub false_positives_after: usize,
    pub false_negatives: usize,
    pub members: usize,
    pub non_members: usize,
}

impl MetricsReport {
    pub fn from_counts(
        false_positives_before: usize,
        false_positives_after: usize,
        false_negatives: usize,
        members: usize,
        non_members: usize,
        troublesome: usize,
    ) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let delta_fp = ratio(
            false_positives_before.saturating_sub(false_positives_after),
            false_positives_before,
        );
        let delta_fn = ratio(false_negatives, members);
        let chi = (delta_fn > 0.0).then(|| delta_fp / delta_fn);
        Self {
            fp_proportion: ratio(false_positives_after, non_members),
            fn_proportion: delta_fn,
            delta_fp,
            delta_fn,
            chi,
            beta: ratio(troublesome, false_positives_before),
            false_positives_before,
            false_positives_after,
            false_negatives,
            members,
            non_members,
        }
    }
}

/// Measures a clearing pass by direct membership tests.
///
/// `universe` is scanned once; keys belonging to `members` are skipped so the
/// scan covers `U - A`. `troublesome` is `|B|`, used only for `beta`.
pub fn measure_metrics<I>(
    before: &BloomFilter,
    after: &BloomFilter,
    members: &[Key],
    universe: I,
    troublesome: usize,
) -> MetricsReport
where
    I: IntoIterator<Item = Key>,
{
    let member_set: HashSet<Key> = members.iter().copied().collect();
    let mut non_members = 0usize;
    let mut fp_before = 0usize;
    let mut fp_after = 0usize;
    for key in universe {
        if member_set.contains(&key) {
            continue;
        }
        non_members += 1;
        if before.contains(key) {
            fp_before += 1;
            if after.contains(key) {
                fp_after += 1;
            }
        }
    }
    let false_negatives = member_set.iter().filter(|&&a| !after.contains(a)).count();
    MetricsReport::from_counts(
        fp_before,
        fp_after,
        false_negatives,
        member_set.len(),
        non_members,
        troublesome,
    )
}
