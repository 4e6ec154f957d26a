//! Selective clearing with counting vectors built once per call.

use super::vectors::{CountingVector, RatioVector};
use super::{argmin_by, Cleared, TroublesomeSet};
use crate::filter::BloomFilter;
use crate::hash::Key;

/// Clears, for each still-positive troublesome key, the position recording
/// the fewest members.
pub fn min_fn_selection(filter: &mut BloomFilter, members: &[Key], troublesome: &TroublesomeSet) -> Cleared {
    let mut counts = CountingVector::build(filter.hashes(), members);
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index = argmin_by(filter.positions(b), |i| Some(counts.get(i))).expect("k >= 1");
        filter.clear_bit(index).expect("hash position in range");
        counts.reset(index);
        cleared.bits.push(index);
    }
    cleared
}

/// Clears, for each still-positive troublesome key, the position shared by
/// the most keys of `census`.
///
/// `census` is the false-positive population counted into `v_B`. Passing
/// `troublesome.keys()` counts `B` only; passing every known false positive
/// lets the choice see which positions also carry untargeted ones, which is
/// what the harness does.
pub fn max_fp_selection(filter: &mut BloomFilter, troublesome: &TroublesomeSet, census: &[Key]) -> Cleared {
    let mut counts = CountingVector::build(filter.hashes(), census);
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index =
            argmin_by(filter.positions(b), |i| Some(std::cmp::Reverse(counts.get(i)))).expect("k >= 1");
        filter.clear_bit(index).expect("hash position in range");
        counts.reset(index);
        cleared.bits.push(index);
    }
    cleared
}

/// Clears, for each still-positive troublesome key, the position with the
/// lowest ratio of members to `census` keys (see [`max_fp_selection`]).
///
/// Only positions whose ratio cell is set are candidates. If none is (every
/// candidate's troublesome count was zeroed upstream), the lowest set
/// position is cleared instead.
pub fn ratio_selection(
    filter: &mut BloomFilter,
    members: &[Key],
    troublesome: &TroublesomeSet,
    census: &[Key],
) -> Cleared {
    let mut a_counts = CountingVector::build(filter.hashes(), members);
    let mut b_counts = CountingVector::build(filter.hashes(), census);
    let mut ratio = RatioVector::unset(filter.m());
    for i in filter.set_bits().collect::<Vec<_>>() {
        ratio.update(i, true, a_counts.get(i) as usize, b_counts.get(i) as usize);
    }
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index = argmin_by(filter.positions(b), |i| ratio.get(i))
            .or_else(|| filter.positions(b).min())
            .expect("k >= 1");
        filter.clear_bit(index).expect("hash position in range");
        a_counts.reset(index);
        b_counts.reset(index);
        ratio.set(index, 0.0);
        cleared.bits.push(index);
    }
    cleared
}
