//! Route-trace corpora: the text format and a synthetic generator.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{derive_seed, Key};

/// One route trace from a monitor towards a destination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRoute {
    pub monitor: u32,
    pub destination: Key,
    /// Responding addresses in order; the last one is where probing ended.
    pub hops: Vec<Key>,
}

impl TraceRoute {
    pub fn reached(&self) -> bool {
        self.hops.last() == Some(&self.destination)
    }

    /// `hops[len-2]` for a trace that reached its destination.
    pub fn penultimate(&self) -> Option<Key> {
        if self.reached() && self.hops.len() >= 2 {
            Some(self.hops[self.hops.len() - 2])
        } else {
            None
        }
    }
}

/// Cycles of traces; cycle 0 is the learning round.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathCorpus {
    pub cycles: Vec<Vec<TraceRoute>>,
    pub monitors: BTreeSet<u32>,
    pub destinations: BTreeSet<Key>,
}

impl PathCorpus {
    /// Builds the monitor and destination sets from the traces.
    pub fn from_cycles(cycles: Vec<Vec<TraceRoute>>) -> Self {
        let mut monitors = BTreeSet::new();
        let mut destinations = BTreeSet::new();
        for t in cycles.iter().flatten() {
            monitors.insert(t.monitor);
            destinations.insert(t.destination);
        }
        Self {
            cycles,
            monitors,
            destinations,
        }
    }

    pub fn cycle(&self, index: usize) -> Option<&[TraceRoute]> {
        self.cycles.get(index).map(Vec::as_slice)
    }

    pub fn trace_count(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

/// Parses `cycle<TAB>monitor<TAB>destination<TAB>hop,hop,...` lines.
///
/// Blank lines and lines starting with `#` are skipped. Cycle numbers need
/// not be contiguous; cycles are ordered by number.
pub fn parse_corpus(text: &str) -> Result<PathCorpus> {
    let mut by_cycle: BTreeMap<u64, Vec<TraceRoute>> = BTreeMap::new();
    let mut lines = 0;
    for (i, raw) in text.lines().enumerate() {
        lines = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let cycle: u64 = fields[0].trim().parse().map_err(|_| err(format!("bad cycle `{}`", fields[0])))?;
        let monitor: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad monitor id `{}`", fields[1])))?;
        let destination: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad destination `{}`", fields[2])))?;
        if fields[3].trim().is_empty() {
            return Err(err("trace has no hops".into()));
        }
        let hops = fields[3]
            .split(',')
            .map(|h| h.trim().parse::<u64>().map(Key))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| err(format!("bad hop list `{}`", fields[3])))?;
        by_cycle.entry(cycle).or_default().push(TraceRoute {
            monitor,
            destination: Key(destination),
            hops,
        });
    }
    if by_cycle.is_empty() {
        return Err(Error::Parse {
            line: lines,
            reason: "corpus contains no traces".into(),
        });
    }
    Ok(PathCorpus::from_cycles(by_cycle.into_values().collect()))
}

pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<PathCorpus> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// Inverse of [`parse_corpus`]; cycles are numbered from 0.
pub fn corpus_to_string(corpus: &PathCorpus) -> String {
    let mut out = String::from("# cycle\tmonitor\tdestination\thops\n");
    for (c, traces) in corpus.cycles.iter().enumerate() {
        for t in traces {
            let _ = write!(out, "{c}\t{}\t{}\t", t.monitor, t.destination);
            for (j, h) in t.hops.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{h}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_corpus(corpus: &PathCorpus, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, corpus_to_string(corpus))?;
    Ok(())
}

/// Parameters of the synthetic topology.
///
/// A path is the monitor's two access hops, a core segment drawn from a
/// Zipf-popular pool, two edge hops shared along destination-rooted trees,
/// the penultimate node and the destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticTopologyConfig {
    pub monitor_count: usize,
    pub destination_count: usize,
    /// Mean hop count, destination included. At least 7.
    pub mean_path_length: f64,
    /// Probability that a new destination hangs off an existing edge
    /// branch (and, again with this probability, shares its penultimate).
    pub sharing_factor: f64,
    /// Per-cycle probability that a destination's last hops change, and
    /// separately that a trace's core segment is rerouted.
    pub dynamics_rate: f64,
    pub cycles: usize,
}

impl Default for SyntheticTopologyConfig {
    fn default() -> Self {
        Self {
            monitor_count: 10,
            destination_count: 1000,
            mean_path_length: 15.0,
            sharing_factor: 0.5,
            dynamics_rate: 0.05,
            cycles: 2,
        }
    }
}

const FIXED_HOPS: f64 = 6.0;
const ZIPF_EXPONENT: f64 = 1.0;

impl SyntheticTopologyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.monitor_count == 0 {
            return Err(Error::config("monitor_count", "must be at least 1"));
        }
        if self.destination_count == 0 {
            return Err(Error::config("destination_count", "must be at least 1"));
        }
        if self.cycles == 0 {
            return Err(Error::config("cycles", "must be at least 1"));
        }
        if !(self.mean_path_length.is_finite() && self.mean_path_length >= FIXED_HOPS + 1.0) {
            return Err(Error::config("mean_path_length", "must be a finite number >= 7"));
        }
        for (field, v) in [("sharing_factor", self.sharing_factor), ("dynamics_rate", self.dynamics_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("{v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn core_pool(&self) -> usize {
        (self.destination_count * 4).max(64)
    }
}

struct Ids(u64);

impl Ids {
    fn fresh(&mut self) -> Key {
        self.0 += 1;
        Key(self.0)
    }
}

#[derive(Clone)]
struct Tail {
    edge: Vec<Key>,
    penultimate: Key,
    destination: Key,
}

struct CoreDraw {
    pool: Vec<Key>,
    zipf: Zipf<f64>,
    mean: f64,
}

impl CoreDraw {
    fn route(&self, rng: &mut ChaCha8Rng) -> Vec<Key> {
        let centre = self.mean.round() as i64;
        let len = rng.random_range((centre - 2).max(1)..=centre + 2) as usize;
        let mut route: Vec<Key> = Vec::with_capacity(len);
        while route.len() < len {
            let mut pick = self.pool[self.zipf.sample(rng) as usize - 1];
            for _ in 0..8 {
                if !route.contains(&pick) {
                    break;
                }
                pick = self.pool[self.zipf.sample(rng) as usize - 1];
            }
            route.push(pick);
        }
        route
    }
}

/// Generates a corpus deterministically from `seed`.
///
/// Penultimate nodes and destinations come from identifiers never used as
/// interior hops, so with `dynamics_rate = 0` every cycle is identical and an
/// exact stop set stops every trace at its penultimate node.
pub fn generate_corpus(config: &SyntheticTopologyConfig, seed: u64) -> Result<PathCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut ids = Ids(0);

    let access: Vec<[Key; 2]> = (0..config.monitor_count).map(|_| [ids.fresh(), ids.fresh()]).collect();
    let pool: Vec<Key> = (0..config.core_pool()).map(|_| ids.fresh()).collect();
    let core = CoreDraw {
        zipf: Zipf::new(pool.len() as f64, ZIPF_EXPONENT).expect("pool is nonempty"),
        pool,
        mean: config.mean_path_length - FIXED_HOPS,
    };

    let mut tails: Vec<Tail> = Vec::with_capacity(config.destination_count);
    for _ in 0..config.destination_count {
        let destination = ids.fresh();
        let tail = if !tails.is_empty() && rng.random_bool(config.sharing_factor) {
            let parent = &tails[rng.random_range(0..tails.len())];
            let edge = parent.edge.clone();
            let penultimate = if rng.random_bool(config.sharing_factor) {
                parent.penultimate
            } else {
                ids.fresh()
            };
            Tail {
                edge,
                penultimate,
                destination,
            }
        } else {
            Tail {
                edge: vec![ids.fresh(), ids.fresh()],
                penultimate: ids.fresh(),
                destination,
            }
        };
        tails.push(tail);
    }

    let mut cores: Vec<Vec<Vec<Key>>> = (0..config.monitor_count)
        .map(|_| (0..config.destination_count).map(|_| core.route(&mut rng)).collect())
        .collect();

    let mut cycles = Vec::with_capacity(config.cycles);
    for c in 0..config.cycles {
        if c > 0 {
            for tail in &mut tails {
                if rng.random_bool(config.dynamics_rate) {
                    if rng.random_bool(0.5) {
                        tail.penultimate = ids.fresh();
                    } else {
                        // The old penultimate becomes an interior hop.
                        tail.edge.push(tail.penultimate);
                        tail.penultimate = ids.fresh();
                    }
                }
            }
            for route in cores.iter_mut().flatten() {
                if rng.random_bool(config.dynamics_rate) {
                    *route = core.route(&mut rng);
                }
            }
        }
        let mut traces = Vec::with_capacity(config.monitor_count * config.destination_count);
        for (m, chain) in access.iter().enumerate() {
            for (d, tail) in tails.iter().enumerate() {
                let mut hops = Vec::with_capacity(cores[m][d].len() + tail.edge.len() + 4);
                hops.extend_from_slice(chain);
                hops.extend_from_slice(&cores[m][d]);
                hops.extend_from_slice(&tail.edge);
                hops.push(tail.penultimate);
                hops.push(tail.destination);
                traces.push(TraceRoute {
                    monitor: m as u32,
                    destination: tail.destination,
                    hops,
                });
            }
        }
        cycles.push(traces);
    }
    Ok(PathCorpus::from_cycles(cycles))
}
