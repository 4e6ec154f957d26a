//! Selective clearing with element lists kept current after every reset.

use super::vectors::{ElementListVector, RatioVector};
use super::{argmin_by, Cleared, TroublesomeSet};
use crate::filter::BloomFilter;
use crate::hash::Key;

pub fn improved_min_fn_selection(
    filter: &mut BloomFilter,
    members: &[Key],
    troublesome: &TroublesomeSet,
) -> Cleared {
    let mut lists = ElementListVector::build(filter.hashes(), members);
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index = argmin_by(filter.positions(b), |i| Some(lists.size(i))).expect("k >= 1");
        lists.clear_cell(index);
        filter.clear_bit(index).expect("hash position in range");
        cleared.bits.push(index);
    }
    cleared
}

pub fn improved_max_fp_selection(
    filter: &mut BloomFilter,
    troublesome: &TroublesomeSet,
    census: &[Key],
) -> Cleared {
    let mut lists = ElementListVector::build(filter.hashes(), census);
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index = argmin_by(filter.positions(b), |i| Some(std::cmp::Reverse(lists.size(i))))
            .expect("k >= 1");
        lists.clear_cell(index);
        filter.clear_bit(index).expect("hash position in range");
        cleared.bits.push(index);
    }
    cleared
}

/// Ratio selection over live element lists. After each reset the ratio of
/// every cell whose lists changed is recomputed, which yields the same vector
/// as a full recomputation over all `m` cells.
pub fn improved_ratio_selection(
    filter: &mut BloomFilter,
    members: &[Key],
    troublesome: &TroublesomeSet,
    census: &[Key],
) -> Cleared {
    let mut a_lists = ElementListVector::build(filter.hashes(), members);
    let mut b_lists = ElementListVector::build(filter.hashes(), census);
    let mut ratio = RatioVector::unset(filter.m());
    for i in filter.set_bits().collect::<Vec<_>>() {
        ratio.update(i, true, a_lists.size(i), b_lists.size(i));
    }
    let mut cleared = Cleared::default();
    for &b in troublesome.keys() {
        if !filter.contains(b) {
            continue;
        }
        let index = argmin_by(filter.positions(b), |i| ratio.get(i))
            .or_else(|| filter.positions(b).min())
            .expect("k >= 1");
        let mut touched = a_lists.clear_cell(index);
        touched.extend(b_lists.clear_cell(index));
        filter.clear_bit(index).expect("hash position in range");
        ratio.set(index, 0.0);
        cleared.bits.push(index);
        for i in touched {
            let bit = filter.bit(i).expect("touched cell in range");
            ratio.update(i, bit, a_lists.size(i), b_lists.size(i));
        }
    }
    cleared
}

#[cfg(test)]
mod tests {
    use super::super::{max_fp_selection, min_fn_selection, ratio_selection};
    use super::*;
    use crate::filter::FilterParams;

    fn setup() -> (BloomFilter, Vec<Key>, Vec<Key>) {
        let p = FilterParams::new(3000, 4, 77).unwrap();
        let members: Vec<Key> = (0..500).map(Key).collect();
        let f = BloomFilter::from_keys(p, members.iter().copied()).unwrap();
        let fps: Vec<Key> = (500..200_000u64).map(Key).filter(|&x| f.contains(x)).collect();
        (f, members, fps)
    }

    #[test]
    fn single_clearing_matches_standard() {
        let (f, members, fps) = setup();
        for &x in fps.iter().take(20) {
            let b = TroublesomeSet::sorted(vec![x]);
            let (mut s, mut i) = (f.clone(), f.clone());
            assert_eq!(min_fn_selection(&mut s, &members, &b), improved_min_fn_selection(&mut i, &members, &b));
            assert_eq!(s, i);
            let (mut s, mut i) = (f.clone(), f.clone());
            assert_eq!(max_fp_selection(&mut s, &b, &fps), improved_max_fp_selection(&mut i, &b, &fps));
            let (mut s, mut i) = (f.clone(), f.clone());
            assert_eq!(
                ratio_selection(&mut s, &members, &b, &fps),
                improved_ratio_selection(&mut i, &members, &b, &fps)
            );
        }
    }

    #[test]
    fn empty_is_noop_and_full_set_is_removed() {
        let (f, members, fps) = setup();
        let mut g = f.clone();
        assert_eq!(improved_ratio_selection(&mut g, &members, &TroublesomeSet::default(), &fps).bits_reset(), 0);
        assert_eq!(g, f);

        let b = TroublesomeSet::sorted(fps.clone());
        for which in 0..3 {
            let mut g = f.clone();
            let c = match which {
                0 => improved_min_fn_selection(&mut g, &members, &b),
                1 => improved_max_fp_selection(&mut g, &b, &fps),
                _ => improved_ratio_selection(&mut g, &members, &b, &fps),
            };
            assert!(b.keys().iter().all(|&x| !g.contains(x)));
            assert!(c.bits_reset() <= b.len());
        }
    }

    #[test]
    fn cleared_troublesome_keys_leave_every_list() {
        let (f, _, fps) = setup();
        let b = TroublesomeSet::sorted(fps);
        let mut lists = ElementListVector::build(f.hashes(), b.keys());
        let index = (0..f.m()).max_by_key(|&i| lists.size(i)).unwrap();
        let listed = lists.cell(index).to_vec();
        let mut g = f.clone();
        lists.clear_cell(index);
        g.clear_bit(index).unwrap();
        for x in listed {
            assert!(!g.contains(x));
            assert!((0..f.m()).all(|i| !lists.cell(i).contains(&x)));
        }
    }
}
