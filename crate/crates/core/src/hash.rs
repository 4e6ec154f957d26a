//! Deterministic hash family.
//!
//! Every one of the `k` functions is modelled as an independent uniform draw
//! over `[0, m)`. A key is first mixed with the master seed into a 64-bit
//! state, then a SplitMix64 stream seeded by that state yields one word per
//! function index. Positions are reduced modulo `m`; duplicates among the `k`
//! positions of one key are kept, as in the independent-uniform model.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed for sub-stream `stream` of `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(mix64(master ^ GOLDEN_GAMMA).wrapping_add(mix64(stream.wrapping_add(1))))
}

/// An element of the universe. String keys enter through [`Key::from_bytes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Key(pub u64);

impl Key {
    /// FNV-1a over the bytes, then mixed, so short strings spread over 64 bits.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        Key(mix64(h))
    }
}

impl From<u64> for Key {
    fn from(v: u64) -> Self {
        Key(v)
    }
}

impl std::fmt::Display for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The `k` hash functions `h_1..h_k` for a fixed `(k, seed, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    k: u32,
    seed: u64,
    m: usize,
    seed_state: u64,
}

impl HashFamily {
    pub fn new(k: u32, seed: u64, m: usize) -> Self {
        Self {
            k,
            seed,
            m,
            seed_state: mix64(seed ^ GOLDEN_GAMMA),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Position of `key` under function `index` (0-based).
    #[inline]
    pub fn position(&self, key: Key, index: u32) -> usize {
        let base = mix64(key.0 ^ self.seed_state);
        let word = mix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(u64::from(index) + 1)));
        (word % self.m as u64) as usize
    }

    /// All `k` positions of `key`, in function order.
    #[inline]
    pub fn positions(&self, key: Key) -> Positions {
        Positions {
            base: mix64(key.0 ^ self.seed_state),
            m: self.m as u64,
            next: 0,
            k: self.k,
        }
    }
}

/// Iterator over the `k` positions of one key.
#[derive(Debug, Clone)]
pub struct Positions {
    base: u64,
    m: u64,
    next: u32,
    k: u32,
}

impl Iterator for Positions {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.next == self.k {
            return None;
        }
        self.next += 1;
        let word = mix64(
            self.base
                .wrapping_add(GOLDEN_GAMMA.wrapping_mul(u64::from(self.next))),
        );
        Some((word % self.m) as usize)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.k - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Positions {}
