//! Retouched Bloom filters.
//!
//! A retouched Bloom filter is an ordinary Bloom filter from which selected
//! bits have been reset, removing chosen false positives at the cost of some
//! random false negatives. This crate provides:
//!
//! - [`filter`]: the bit vector, hashing, merging and the `RBF1` file format;
//! - [`analysis`]: closed-form error rates and empirical error accounting;
//! - [`retouch`]: randomized and selective bit clearing;
//! - [`harness`]: seeded multi-trial experiments with Student-t intervals;
//! - [`rss`]: a stop-set replay simulator for route tracing.

pub mod analysis;
pub mod error;
pub mod filter;
pub mod harness;
pub mod hash;
pub mod retouch;
pub mod rss;
pub mod stats;

pub use error::{Error, Result};
pub use filter::{BloomFilter, FilterParams};
pub use hash::{HashFamily, Key};
pub use retouch::{Algorithm, ClearingOutcome, TroublesomeSet};
