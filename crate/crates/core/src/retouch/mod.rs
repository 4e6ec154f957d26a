//! Bit-clearing procedures that turn a Bloom filter into a retouched one.
//!
//! Two families live here. [`randomized_clearing`] resets arbitrary set
//! bits and is the analytic baseline (χ stays at 1 in expectation). The
//! selective procedures only ever clear one of a troublesome key's own
//! positions, so every key of `B` tests negative afterwards:
//!
//! | procedure                     | bookkeeping                      | cost                   |
//! |-------------------------------|----------------------------------|------------------------|
//! | [`random_selection`]          | none                             | `O(k·|B|)`             |
//! | [`min_fn_selection`]          | counting vector over `A`         | `O(k·(|A|+|B|))`       |
//! | [`max_fp_selection`]          | counting vector over `F_P`       | `O(k·|F_P|)`           |
//! | [`ratio_selection`]           | both, plus a ratio vector        | `O(k·(|A|+|F_P|) + m)` |
//! | [`improved_min_fn_selection`] | element lists over `A`           | `O(k·(|A|+|B|))`       |
//! | [`improved_max_fp_selection`] | element lists over `F_P`         | `O(k·|F_P|)`           |
//! | [`improved_ratio_selection`]  | both element lists, live ratios  | `O(k·(|A|+|F_P|) + m)` |
//!
//! The standard variants build their counting vectors once and never
//! refresh them, so they overestimate the false negatives a clearing will
//! cause as the pass progresses. The improved variants forget every key
//! listed at a cleared cell, keeping the estimates exact.
//!
//! The false-positive side is counted over a caller-supplied census, usually
//! all of `F_P`; with `B` as the census the counts only see targeted keys.
//!
//! Ties between candidate positions go to the lowest bit index. `B` is
//! processed in the order of its [`TroublesomeSet`].

mod improved;
mod standard;
pub mod vectors;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::Key;

pub use improved::{improved_max_fp_selection, improved_min_fn_selection, improved_ratio_selection};
pub use standard::{max_fp_selection, min_fn_selection, ratio_selection};

/// The keys to remove, in processing order. Keys are distinct.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TroublesomeSet {
    keys: Vec<Key>,
}

impl TroublesomeSet {
    /// Sorted by key value, duplicates dropped. This is the default order.
    pub fn sorted(mut keys: Vec<Key>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        Self { keys }
    }

    /// Keeps the given order; later duplicates are dropped.
    pub fn in_order(keys: Vec<Key>) -> Self {
        let mut seen = std::collections::HashSet::with_capacity(keys.len());
        let keys = keys.into_iter().filter(|k| seen.insert(*k)).collect();
        Self { keys }
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Indices of the bits a procedure reset, in the order it reset them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cleared {
    pub bits: Vec<usize>,
}

impl Cleared {
    pub fn bits_reset(&self) -> usize {
        self.bits.len()
    }
}

/// What a clearing pass did, counted against the filter it left behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ClearingOutcome {
    /// `s`, bits reset.
    pub bits_reset: usize,
    /// `|B|`, the troublesome keys targeted.
    pub troublesome: usize,
    /// Keys of `B` now testing negative.
    pub removed_troublesome: usize,
    /// `|B'|`, other former false positives now testing negative.
    pub side_removed: usize,
    /// `|A'|`, members now testing negative.
    pub generated_fn: usize,
}

impl ClearingOutcome {
    /// Recounts everything from the retouched filter. `false_positives` is the
    /// false-positive set of the filter before clearing; `troublesome` must be
    /// a subset of it.
    pub fn tally(
        after: &BloomFilter,
        members: &[Key],
        false_positives: &[Key],
        troublesome: &TroublesomeSet,
        cleared: &Cleared,
    ) -> Self {
        let b: std::collections::HashSet<Key> = troublesome.keys().iter().copied().collect();
        let mut removed_troublesome = 0;
        let mut side_removed = 0;
        for &x in false_positives {
            if !after.contains(x) {
                if b.contains(&x) {
                    removed_troublesome += 1;
                } else {
                    side_removed += 1;
                }
            }
        }
        Self {
            bits_reset: cleared.bits_reset(),
            troublesome: troublesome.len(),
            removed_troublesome,
            side_removed,
            generated_fn: members.iter().filter(|&&a| !after.contains(a)).count(),
        }
    }

    /// `|B| + |B'|` as reported in the result tables.
    pub fn total_removed(&self) -> usize {
        self.removed_troublesome + self.side_removed
    }

    /// `Δf_P / Δf_N`, or `None` when no false negative appeared.
    pub fn chi(&self, false_positives: usize, members: usize) -> Option<f64> {
        if self.generated_fn == 0 || false_positives == 0 || members == 0 {
            return None;
        }
        let dfp = self.total_removed() as f64 / false_positives as f64;
        let dfn = self.generated_fn as f64 / members as f64;
        Some(dfp / dfn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Randomized,
    #[serde(rename = "random_sel")]
    RandomSelection,
    MinFn,
    MaxFp,
    Ratio,
    ImprovedMinFn,
    ImprovedMaxFp,
    ImprovedRatio,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Randomized,
        Algorithm::RandomSelection,
        Algorithm::MinFn,
        Algorithm::MaxFp,
        Algorithm::Ratio,
        Algorithm::ImprovedMinFn,
        Algorithm::ImprovedMaxFp,
        Algorithm::ImprovedRatio,
    ];

    /// The four selective algorithms with counting vectors.
    pub const STANDARD: [Algorithm; 4] = [
        Algorithm::RandomSelection,
        Algorithm::MinFn,
        Algorithm::MaxFp,
        Algorithm::Ratio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Randomized => "randomized",
            Algorithm::RandomSelection => "random_sel",
            Algorithm::MinFn => "min_fn",
            Algorithm::MaxFp => "max_fp",
            Algorithm::Ratio => "ratio",
            Algorithm::ImprovedMinFn => "improved_min_fn",
            Algorithm::ImprovedMaxFp => "improved_max_fp",
            Algorithm::ImprovedRatio => "improved_ratio",
        }
    }

    /// Standard counterpart for improved variants, identity otherwise.
    pub fn standard(self) -> Algorithm {
        match self {
            Algorithm::ImprovedMinFn => Algorithm::MinFn,
            Algorithm::ImprovedMaxFp => Algorithm::MaxFp,
            Algorithm::ImprovedRatio => Algorithm::Ratio,
            other => other,
        }
    }

    pub fn improved(self) -> Option<Algorithm> {
        match self {
            Algorithm::MinFn => Some(Algorithm::ImprovedMinFn),
            Algorithm::MaxFp => Some(Algorithm::ImprovedMaxFp),
            Algorithm::Ratio => Some(Algorithm::ImprovedRatio),
            _ => None,
        }
    }

    /// Whether the procedure draws random numbers.
    pub fn is_randomized(self) -> bool {
        matches!(self, Algorithm::Randomized | Algorithm::RandomSelection)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// Runs `algorithm` on `filter` in place. `census` feeds the false-positive
/// counts of the max-FP and ratio procedures.
///
/// For [`Algorithm::Randomized`] the troublesome set only fixes the budget:
/// `min(|B|, popcount)` set bits are cleared at random, whichever keys they
/// belong to.
pub fn apply(
    algorithm: Algorithm,
    filter: &mut BloomFilter,
    members: &[Key],
    troublesome: &TroublesomeSet,
    census: &[Key],
    rng_seed: u64,
) -> Cleared {
    match algorithm {
        Algorithm::Randomized => {
            let s = troublesome.len().min(filter.popcount());
            randomized_clearing(filter, s, rng_seed).expect("budget capped at popcount")
        }
        Algorithm::RandomSelection => random_selection(filter, troublesome, rng_seed),
        Algorithm::MinFn => min_fn_selection(filter, members, troublesome),
        Algorithm::MaxFp => max_fp_selection(filter, troublesome, census),
        Algorithm::Ratio => ratio_selection(filter, members, troublesome, census),
        Algorithm::ImprovedMinFn => improved_min_fn_selection(filter, members, troublesome),
        Algorithm::ImprovedMaxFp => improved_max_fp_selection(filter, troublesome, census),
        Algorithm::ImprovedRatio => improved_ratio_selection(filter, members, troublesome, census),
    }
}

/// Resets `s` distinct set bits chosen uniformly without replacement.
pub fn randomized_clearing(filter: &mut BloomFilter, s: usize, rng_seed: u64) -> Result<Cleared> {
    let set: Vec<usize> = filter.set_bits().collect();
    if s > set.len() {
        return Err(Error::InsufficientSetBits {
            requested: s,
            available: set.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut bits: Vec<usize> = index::sample(&mut rng, set.len(), s)
        .into_iter()
        .map(|i| set[i])
        .collect();
    bits.sort_unstable();
    for &i in &bits {
        filter.clear_bit(i).expect("index from set_bits");
    }
    Ok(Cleared { bits })
}

/// For each still-positive troublesome key, resets one of its `k` positions
/// drawn uniformly.
pub fn random_selection(filter: &mut BloomFilter, troublesome: &TroublesomeSet, rng_seed: u64) -> Cleared {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = filter.k() as usize;
    let mut cleared = Cleared::default();
    let mut positions = Vec::with_capacity(k);
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        positions.clear();
        positions.extend(filter.positions(b));
        let index = positions[rng.random_range(0..k)];
        filter.clear_bit(index).expect("hash position in range");
        cleared.bits.push(index);
    }
    cleared
}

/// Position with the smallest score; ties go to the lowest index.
pub(crate) fn argmin_by<I, S, F>(positions: I, score: F) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    S: PartialOrd,
    F: Fn(usize) -> Option<S>,
{
    let mut best: Option<(S, usize)> = None;
    for i in positions {
        let Some(s) = score(i) else { continue };
        let better = match &best {
            None => true,
            Some((bs, bi)) => s < *bs || (s == *bs && i < *bi),
        };
        if better {
            best = Some((s, i));
        }
    }
    best.map(|(_, i)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterParams;

    fn filter_with(m: usize, k: u32, keys: impl IntoIterator<Item = u64>) -> BloomFilter {
        BloomFilter::from_keys(FilterParams::new(m, k, 17).unwrap(), keys.into_iter().map(Key)).unwrap()
    }

    #[test]
    fn argmin_ties_take_lowest_index() {
        let scores = [5, 1, 3, 1, 1];
        assert_eq!(argmin_by([4, 3, 1], |i| Some(scores[i])), Some(1));
        assert_eq!(argmin_by([2, 0], |i| Some(scores[i])), Some(2));
        assert_eq!(argmin_by([2, 0], |_| None::<u32>), None);
    }

    #[test]
    fn randomized_zero_and_all() {
        let mut f = filter_with(500, 3, 0..60);
        let before = f.clone();
        let c = randomized_clearing(&mut f, 0, 1).unwrap();
        assert_eq!(c.bits_reset(), 0);
        assert_eq!(f, before);

        let pop = f.popcount();
        let c = randomized_clearing(&mut f, pop, 1).unwrap();
        assert_eq!(c.bits_reset(), pop);
        assert_eq!(f.popcount(), 0);
        assert!((0..60).all(|x| !f.contains(Key(x))));

        assert_eq!(
            randomized_clearing(&mut before.clone(), pop + 1, 1),
            Err(Error::InsufficientSetBits {
                requested: pop + 1,
                available: pop
            })
        );
    }

    #[test]
    fn randomized_clears_distinct_set_bits() {
        let mut f = filter_with(2000, 4, 0..200);
        let set: std::collections::HashSet<usize> = f.set_bits().collect();
        let pop = f.popcount();
        let c = randomized_clearing(&mut f, 100, 9).unwrap();
        let unique: std::collections::HashSet<usize> = c.bits.iter().copied().collect();
        assert_eq!(unique.len(), 100);
        assert!(unique.iter().all(|i| set.contains(i)));
        assert_eq!(f.popcount(), pop - 100);
    }

    #[test]
    fn random_selection_empty_and_single() {
        let mut f = filter_with(1000, 4, 0..50);
        let before = f.clone();
        assert_eq!(random_selection(&mut f, &TroublesomeSet::default(), 3).bits_reset(), 0);
        assert_eq!(f, before);

        let fp = (1000..100_000u64)
            .map(Key)
            .find(|&x| {
                let mut p: Vec<usize> = f.positions(x).collect();
                p.sort_unstable();
                p.dedup();
                f.contains(x) && p.len() == 4
            })
            .expect("some false positive with distinct positions");
        let c = random_selection(&mut f, &TroublesomeSet::sorted(vec![fp]), 3);
        assert_eq!(c.bits_reset(), 1);
        assert!(!f.contains(fp));
        assert_eq!(f.popcount(), before.popcount() - 1);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn troublesome_set_order_and_dedup() {
        let s = TroublesomeSet::sorted(vec![Key(5), Key(1), Key(5)]);
        assert_eq!(s.keys(), &[Key(1), Key(5)]);
        let s = TroublesomeSet::in_order(vec![Key(5), Key(1), Key(5)]);
        assert_eq!(s.keys(), &[Key(5), Key(1)]);
    }
}
