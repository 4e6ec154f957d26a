//! Auxiliary per-cell vectors used to pick which bit to clear.

use crate::hash::{HashFamily, Key};

/// Per-cell count of recorded keys. Built once, never refreshed from the
/// keys afterwards; the selection loops only zero the cell they clear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingVector {
    cells: Vec<u32>,
}

impl CountingVector {
    pub fn build(hashes: &HashFamily, keys: &[Key]) -> Self {
        let mut cells = vec![0u32; hashes.m()];
        for &key in keys {
            for i in hashes.positions(key) {
                cells[i] += 1;
            }
        }
        Self { cells }
    }

    pub fn get(&self, index: usize) -> u32 {
        self.cells[index]
    }

    pub fn reset(&mut self, index: usize) {
        self.cells[index] = 0;
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|&c| u64::from(c)).sum()
    }
}

/// Per-cell list of the keys hashed there. Unlike [`CountingVector`] it can
/// forget a key everywhere at once, so cell sizes always reflect the keys
/// that are still live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementListVector {
    cells: Vec<Vec<Key>>,
    hashes: HashFamily,
}

impl ElementListVector {
    pub fn build(hashes: &HashFamily, keys: &[Key]) -> Self {
        let mut cells = vec![Vec::new(); hashes.m()];
        for &key in keys {
            for i in hashes.positions(key) {
                cells[i].push(key);
            }
        }
        Self {
            cells,
            hashes: *hashes,
        }
    }

    pub fn cell(&self, index: usize) -> &[Key] {
        &self.cells[index]
    }

    pub fn size(&self, index: usize) -> usize {
        self.cells[index].len()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Removes every key listed at `index` from all of its cells. Returns the
    /// cells whose lists changed (may repeat).
    pub fn clear_cell(&mut self, index: usize) -> Vec<usize> {
        let listed = std::mem::take(&mut self.cells[index]);
        let mut touched = vec![index];
        let mut seen: Vec<Key> = Vec::with_capacity(listed.len());
        for key in listed {
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            for i in self.hashes.positions(key) {
                self.cells[i].retain(|&x| x != key);
                touched.push(i);
            }
        }
        touched
    }

    /// Fraction of cells holding at least one key.
    pub fn occupancy(&self) -> f64 {
        self.cells.iter().filter(|c| !c.is_empty()).count() as f64 / self.cells.len() as f64
    }

    /// Mean list length over non-empty cells (0 when all are empty).
    pub fn mean_list_len(&self) -> f64 {
        let (filled, total) = self
            .cells
            .iter()
            .filter(|c| !c.is_empty())
            .fold((0usize, 0usize), |(f, t), c| (f + 1, t + c.len()));
        if filled == 0 {
            0.0
        } else {
            total as f64 / filled as f64
        }
    }
}

/// `r[i] = |A at i| / |B at i|`, set only where the filter bit is 1 and the
/// B side is non-empty. Unset cells keep whatever value they last held.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioVector {
    cells: Vec<Option<f64>>,
}

impl RatioVector {
    pub fn unset(m: usize) -> Self {
        Self {
            cells: vec![None; m],
        }
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.cells[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.cells[index] = Some(value);
    }

    /// Writes `a / b` into the cell when the guard holds; leaves it alone otherwise.
    pub fn update(&mut self, index: usize, bit_set: bool, a: usize, b: usize) {
        if bit_set && b > 0 {
            self.cells[index] = Some(a as f64 / b as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_total_is_k_times_n() {
        let h = HashFamily::new(4, 3, 97);
        let keys: Vec<Key> = (0..50).map(Key).collect();
        let cv = CountingVector::build(&h, &keys);
        assert_eq!(cv.total(), 200);
    }

    #[test]
    fn element_list_sizes_match_counts() {
        let h = HashFamily::new(3, 8, 61);
        let keys: Vec<Key> = (0..40).map(Key).collect();
        let cv = CountingVector::build(&h, &keys);
        let el = ElementListVector::build(&h, &keys);
        for i in 0..61 {
            assert_eq!(el.size(i), cv.get(i) as usize);
        }
    }

    #[test]
    fn clear_cell_forgets_keys_everywhere() {
        let h = HashFamily::new(3, 8, 61);
        let keys: Vec<Key> = (0..40).map(Key).collect();
        let mut el = ElementListVector::build(&h, &keys);
        let index = (0..61).max_by_key(|&i| el.size(i)).unwrap();
        let gone: Vec<Key> = el.cell(index).to_vec();
        let before: Vec<usize> = (0..61).map(|i| el.size(i)).collect();
        el.clear_cell(index);
        for (i, &was) in before.iter().enumerate() {
            assert!(el.cell(i).iter().all(|k| !gone.contains(k)));
            let lost = was - el.size(i);
            let expected: usize = gone
                .iter()
                .map(|&g| h.positions(g).filter(|&p| p == i).count())
                .sum();
            assert_eq!(lost, expected, "cell {i}");
        }
    }

    #[test]
    fn ratio_guard() {
        let mut r = RatioVector::unset(4);
        r.update(0, false, 1, 1);
        r.update(1, true, 3, 0);
        r.update(2, true, 3, 2);
        assert_eq!(r.get(0), None);
        assert_eq!(r.get(1), None);
        assert_eq!(r.get(2), Some(1.5));
        r.update(2, true, 3, 0);
        assert_eq!(r.get(2), Some(1.5));
    }
}
