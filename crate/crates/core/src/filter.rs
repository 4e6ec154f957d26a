//! The m-bit Bloom filter and its binary file format.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "RBF1" | version u8 = 1 | m u64 | k u32 | seed u64 | ceil(m/8) payload bytes
//! ```
//!
//! Bit `i` lives in payload byte `i / 8` at bit position `i % 8` (LSB first).

use std::fmt;

use crate::error::{Error, Result};
use crate::hash::{HashFamily, Key, Positions};

pub const MAGIC: &[u8; 4] = b"RBF1";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 8 + 4 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterParams {
    pub m: usize,
    pub k: u32,
    pub seed: u64,
}

impl FilterParams {
    pub fn new(m: usize, k: u32, seed: u64) -> Result<Self> {
        let p = Self { m, k, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if self.k as usize > self.m {
            return Err(Error::InvalidParams(format!(
                "k = {} exceeds m = {}",
                self.k, self.m
            )));
        }
        Ok(())
    }
}

impl fmt::Display for FilterParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, k={}, seed={})", self.m, self.k, self.seed)
    }
}

/// A Bloom filter over [`Key`]s. Clearing bits turns it into a retouched filter;
/// the type is the same.
#[derive(Clone, PartialEq, Eq)]
pub struct BloomFilter {
    params: FilterParams,
    hashes: HashFamily,
    words: Vec<u64>,
}

impl fmt::Debug for BloomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BloomFilter")
            .field("params", &self.params)
            .field("popcount", &self.popcount())
            .finish()
    }
}

impl BloomFilter {
    pub fn new(params: FilterParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            hashes: HashFamily::new(params.k, params.seed, params.m),
            words: vec![0; params.m.div_ceil(64)],
        })
    }

    /// Builds a filter and inserts every key.
    pub fn from_keys<I>(params: FilterParams, keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = Key>,
    {
        let mut f = Self::new(params)?;
        for key in keys {
            f.insert(key);
        }
        Ok(f)
    }

    pub fn params(&self) -> FilterParams {
        self.params
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn k(&self) -> u32 {
        self.params.k
    }

    pub fn hashes(&self) -> &HashFamily {
        &self.hashes
    }

    pub fn positions(&self, key: Key) -> Positions {
        self.hashes.positions(key)
    }

    pub fn insert(&mut self, key: Key) {
        for i in self.hashes.positions(key) {
            self.words[i >> 6] |= 1 << (i & 63);
        }
    }

    #[inline]
    pub fn contains(&self, key: Key) -> bool {
        self.hashes.positions(key).all(|i| self.bit_unchecked(i))
    }

    #[inline]
    fn bit_unchecked(&self, index: usize) -> bool {
        self.words[index >> 6] >> (index & 63) & 1 == 1
    }

    pub fn bit(&self, index: usize) -> Result<bool> {
        self.check_index(index)?;
        Ok(self.bit_unchecked(index))
    }

    pub fn clear_bit(&mut self, index: usize) -> Result<()> {
        self.check_index(index)?;
        self.words[index >> 6] &= !(1 << (index & 63));
        Ok(())
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.params.m {
            return Err(Error::IndexOutOfRange {
                index,
                m: self.params.m,
            });
        }
        Ok(())
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Proportion of bits set, the empirical `p_1`.
    pub fn fill_ratio(&self) -> f64 {
        self.popcount() as f64 / self.params.m as f64
    }

    /// Indices of all set bits, ascending.
    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Bitwise OR of two filters built with identical parameters.
    pub fn merge_or(&self, other: &BloomFilter) -> Result<BloomFilter> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch {
                left: self.params.to_string(),
                right: other.params.to_string(),
            });
        }
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        Ok(out)
    }

    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + self.params.m.div_ceil(8)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(self.params.m as u64).to_le_bytes());
        out.extend_from_slice(&self.params.k.to_le_bytes());
        out.extend_from_slice(&self.params.seed.to_le_bytes());
        let payload_len = self.params.m.div_ceil(8);
        out.extend(self.words.iter().flat_map(|w| w.to_le_bytes()).take(payload_len));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<BloomFilter> {
        if bytes.len() < 4 {
            return Err(Error::TruncatedPayload {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedPayload {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let version = bytes[4];
        if version != FORMAT_VERSION {
            return Err(Error::VersionUnsupported(version));
        }
        let m = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
        let k = u32::from_le_bytes(bytes[13..17].try_into().unwrap());
        let seed = u64::from_le_bytes(bytes[17..25].try_into().unwrap());
        let m = usize::try_from(m)
            .map_err(|_| Error::InvalidParams(format!("m = {m} does not fit in memory")))?;
        let params = FilterParams::new(m, k, seed)?;
        let payload = &bytes[HEADER_LEN..];
        let payload_len = m.div_ceil(8);
        if payload.len() < payload_len {
            return Err(Error::TruncatedPayload {
                expected: HEADER_LEN + payload_len,
                found: bytes.len(),
            });
        }
        let mut filter = BloomFilter::new(params)?;
        for (wi, chunk) in payload[..payload_len].chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            filter.words[wi] = u64::from_le_bytes(buf);
        }
        // Padding bits past m carry no meaning.
        if m % 64 != 0 {
            let last = filter.words.len() - 1;
            filter.words[last] &= (1u64 << (m % 64)) - 1;
        }
        Ok(filter)
    }
}
