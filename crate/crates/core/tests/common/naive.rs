//! Slow, direct reference implementations. Nothing here calls into the
//! library except for the key and set types it has to hand back.
#![allow(dead_code)]

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn positions(key: u64, k: u32, seed: u64, m: usize) -> Vec<usize> {
    let base = mix(key ^ mix(seed ^ GAMMA));
    (0..k)
        .map(|j| (mix(base.wrapping_add(GAMMA.wrapping_mul(u64::from(j) + 1))) % m as u64) as usize)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub bits: Vec<bool>,
    pub k: u32,
    pub seed: u64,
}

impl Filter {
    pub fn build(m: usize, k: u32, seed: u64, keys: &[u64]) -> Self {
        let mut f = Filter { bits: vec![false; m], k, seed };
        for &x in keys {
            for p in f.pos(x) {
                f.bits[p] = true;
            }
        }
        f
    }

    pub fn m(&self) -> usize {
        self.bits.len()
    }

    pub fn pos(&self, x: u64) -> Vec<usize> {
        positions(x, self.k, self.seed, self.m())
    }

    pub fn contains(&self, x: u64) -> bool {
        self.pos(x).iter().all(|&p| self.bits[p])
    }

    pub fn set_bits(&self) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.bits[i]).collect()
    }

    fn clear(&mut self, i: usize, log: &mut Vec<usize>) {
        self.bits[i] = false;
        log.push(i);
    }
}

pub fn false_positives(f: &Filter, members: &[u64], universe: u64) -> Vec<u64> {
    (0..universe)
        .filter(|x| !members.contains(x) && f.contains(*x))
        .collect()
}

/// Lowest index among the best-scoring positions.
fn pick<S: PartialOrd + Copy>(pos: &[usize], score: impl Fn(usize) -> Option<S>) -> Option<usize> {
    let mut best: Option<(S, usize)> = None;
    for &p in pos {
        if let Some(s) = score(p) {
            best = match best {
                Some((bs, bi)) if bs < s || (bs == s && bi <= p) => Some((bs, bi)),
                _ => Some((s, p)),
            };
        }
    }
    best.map(|(_, i)| i)
}

fn count_at(f: &Filter, keys: &[u64], i: usize) -> usize {
    keys.iter()
        .map(|&x| f.pos(x).iter().filter(|&&p| p == i).count())
        .sum()
}

pub fn randomized(f: &mut Filter, s: usize, seed: u64) -> Vec<usize> {
    let set = f.set_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, set.len(), s)
        .into_iter()
        .map(|i| set[i])
        .collect();
    chosen.sort_unstable();
    let mut log = Vec::new();
    for i in chosen {
        f.clear(i, &mut log);
    }
    log
}

pub fn random_selection(f: &mut Filter, b: &[u64], seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let pos = f.pos(x);
            let i = pos[rng.random_range(0..pos.len())];
            f.clear(i, &mut log);
        }
    }
    log
}

pub fn min_fn(f: &mut Filter, members: &[u64], b: &[u64]) -> Vec<usize> {
    let mut counts: Vec<usize> = (0..f.m()).map(|i| count_at(f, members, i)).collect();
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let i = pick(&f.pos(x), |p| Some(counts[p])).unwrap();
            counts[i] = 0;
            f.clear(i, &mut log);
        }
    }
    log
}

pub fn max_fp(f: &mut Filter, b: &[u64], census: &[u64]) -> Vec<usize> {
    let mut counts: Vec<usize> = (0..f.m()).map(|i| count_at(f, census, i)).collect();
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let i = pick(&f.pos(x), |p| Some(std::cmp::Reverse(counts[p]))).unwrap();
            counts[i] = 0;
            f.clear(i, &mut log);
        }
    }
    log
}

pub fn ratio(f: &mut Filter, members: &[u64], b: &[u64], census: &[u64]) -> Vec<usize> {
    let mut r: Vec<Option<f64>> = (0..f.m())
        .map(|i| {
            let bc = count_at(f, census, i);
            (f.bits[i] && bc > 0).then(|| count_at(f, members, i) as f64 / bc as f64)
        })
        .collect();
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let pos = f.pos(x);
            let i = pick(&pos, |p| r[p]).unwrap_or_else(|| *pos.iter().min().unwrap());
            r[i] = Some(0.0);
            f.clear(i, &mut log);
        }
    }
    log
}

/// Keys none of whose positions has been cleared by the procedure so far.
fn live(f: &Filter, keys: &[u64], cleared: &[usize]) -> Vec<u64> {
    keys.iter()
        .copied()
        .filter(|&x| f.pos(x).iter().all(|p| !cleared.contains(p)))
        .collect()
}

pub fn improved_min_fn(f: &mut Filter, members: &[u64], b: &[u64]) -> Vec<usize> {
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let a = live(f, members, &log);
            let i = pick(&f.pos(x), |p| Some(count_at(f, &a, p))).unwrap();
            f.clear(i, &mut log);
        }
    }
    log
}

pub fn improved_max_fp(f: &mut Filter, b: &[u64], census: &[u64]) -> Vec<usize> {
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let c = live(f, census, &log);
            let i = pick(&f.pos(x), |p| Some(std::cmp::Reverse(count_at(f, &c, p)))).unwrap();
            f.clear(i, &mut log);
        }
    }
    log
}

/// Recomputes every ratio cell from the live key sets after each reset.
pub fn improved_ratio(f: &mut Filter, members: &[u64], b: &[u64], census: &[u64]) -> Vec<usize> {
    let mut r: Vec<Option<f64>> = vec![None; f.m()];
    let refresh = |f: &Filter, r: &mut Vec<Option<f64>>, log: &[usize]| {
        let a = live(f, members, log);
        let c = live(f, census, log);
        for (i, slot) in r.iter_mut().enumerate() {
            let bc = count_at(f, &c, i);
            if f.bits[i] && bc > 0 {
                *slot = Some(count_at(f, &a, i) as f64 / bc as f64);
            }
        }
    };
    refresh(f, &mut r, &[]);
    let mut log = Vec::new();
    for &x in b {
        if f.contains(x) {
            let pos = f.pos(x);
            let i = pick(&pos, |p| r[p]).unwrap_or_else(|| *pos.iter().min().unwrap());
            r[i] = Some(0.0);
            f.clear(i, &mut log);
            refresh(f, &mut r, &log);
        }
    }
    log
}

/// Runs the named procedure; `b` is processed in the given order.
pub fn run(name: &str, f: &mut Filter, members: &[u64], b: &[u64], census: &[u64], seed: u64) -> Vec<usize> {
    match name {
        "randomized" => {
            let s = b.len().min(f.set_bits().len());
            randomized(f, s, seed)
        }
        "random_sel" => random_selection(f, b, seed),
        "min_fn" => min_fn(f, members, b),
        "max_fp" => max_fp(f, b, census),
        "ratio" => ratio(f, members, b, census),
        "improved_min_fn" => improved_min_fn(f, members, b),
        "improved_max_fp" => improved_max_fp(f, b, census),
        "improved_ratio" => improved_ratio(f, members, b, census),
        other => panic!("unknown procedure {other}"),
    }
}
