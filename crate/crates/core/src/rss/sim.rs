//! Stop-set construction, encoding and replay.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{PathCorpus, TraceRoute};
use crate::error::{Error, Result};
use crate::filter::{BloomFilter, FilterParams};
use crate::hash::{derive_seed, Key};
use crate::retouch::{self, Algorithm, TroublesomeSet};

/// Penultimate nodes of every trace in `cycle` that reached its destination.
pub fn build_rss(cycle: &[TraceRoute]) -> BTreeSet<Key> {
    cycle.iter().filter_map(TraceRoute::penultimate).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RssKind {
    List,
    Bloom,
    Rbf,
}

impl RssKind {
    pub const ALL: [RssKind; 3] = [RssKind::List, RssKind::Bloom, RssKind::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            RssKind::List => "list",
            RssKind::Bloom => "bloom",
            RssKind::Rbf => "rbf",
        }
    }
}

impl fmt::Display for RssKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RssKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RssKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("kind", format!("unknown stop-set kind `{s}`")))
    }
}

/// How to encode a stop set. `m`, `k` and `seed` are ignored for lists;
/// `beta` and `algorithm` only matter for [`RssKind::Rbf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: RssKind,
    pub m: usize,
    pub k: u32,
    pub seed: u64,
    pub beta: f64,
    pub algorithm: Algorithm,
}

impl EncodingSpec {
    pub fn list() -> Self {
        Self {
            kind: RssKind::List,
            m: 0,
            k: 0,
            seed: 0,
            beta: 0.0,
            algorithm: Algorithm::Ratio,
        }
    }

    pub fn bloom(m: usize, k: u32, seed: u64) -> Self {
        Self {
            kind: RssKind::Bloom,
            m,
            k,
            seed,
            beta: 0.0,
            algorithm: Algorithm::Ratio,
        }
    }

    pub fn rbf(m: usize, k: u32, seed: u64, beta: f64) -> Self {
        Self {
            kind: RssKind::Rbf,
            beta,
            ..Self::bloom(m, k, seed)
        }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != RssKind::List {
            FilterParams::new(self.m, self.k, self.seed)?;
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config("beta", format!("{} is outside [0, 1]", self.beta)));
        }
        Ok(())
    }
}

/// What retouching did to an RBF-encoded stop set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetouchSummary {
    pub beta: f64,
    pub algorithm: Algorithm,
    /// `|F_P|` among learning-cycle nodes.
    pub false_positives: usize,
    /// `|B|`.
    pub troublesome: usize,
    pub bits_reset: usize,
    /// Stop-set members the retouched filter no longer reports.
    pub false_negatives: usize,
}

/// An encoded stop set.
///
/// Every encoding keeps the exact set it was built from; replay uses it as
/// the reference for the topology-missed measures.
#[derive(Debug, Clone)]
pub struct RssImplementation {
    kind: RssKind,
    rss: HashSet<Key>,
    filter: Option<BloomFilter>,
    retouch: Option<RetouchSummary>,
}

impl RssImplementation {
    pub fn kind(&self) -> RssKind {
        self.kind
    }

    pub fn contains(&self, key: Key) -> bool {
        match &self.filter {
            Some(f) => f.contains(key),
            None => self.rss.contains(&key),
        }
    }

    pub fn filter(&self) -> Option<&BloomFilter> {
        self.filter.as_ref()
    }

    pub fn retouch(&self) -> Option<&RetouchSummary> {
        self.retouch.as_ref()
    }

    pub fn rss_len(&self) -> usize {
        self.rss.len()
    }

    fn reference(&self) -> RssImplementation {
        RssImplementation {
            kind: RssKind::List,
            rss: self.rss.clone(),
            filter: None,
            retouch: None,
        }
    }
}

/// The Bloom encoding plus the false positives seen in a dry run of the
/// learning cycle, ranked most troublesome first. Shared by [`encode_rss`]
/// and [`beta_sweep`] so a sweep builds and ranks once.
struct Retoucher {
    rss: HashSet<Key>,
    members: Vec<Key>,
    bloom: BloomFilter,
    ranked: Vec<Key>,
}

impl Retoucher {
    fn new(rss: &BTreeSet<Key>, learning: &[TraceRoute], spec: &EncodingSpec) -> Result<Self> {
        let params = FilterParams::new(spec.m, spec.k, spec.seed)?;
        let members: Vec<Key> = rss.iter().copied().collect();
        let bloom = BloomFilter::from_keys(params, members.iter().copied())?;
        let rss: HashSet<Key> = members.iter().copied().collect();
        let dry = RssImplementation {
            kind: RssKind::Bloom,
            rss: rss.clone(),
            filter: Some(bloom.clone()),
            retouch: None,
        };
        let trouble = replay_probing(learning, &dry).troublesomeness;
        let mut candidates = BTreeSet::new();
        for t in learning {
            for &h in tested_hops(t) {
                if h != t.destination && !rss.contains(&h) && bloom.contains(h) {
                    candidates.insert(h);
                }
            }
        }
        let mut ranked: Vec<Key> = candidates.into_iter().collect();
        ranked.sort_by_key(|k| (Reverse(trouble.get(k).copied().unwrap_or(0)), *k));
        Ok(Self {
            rss,
            members,
            bloom,
            ranked,
        })
    }

    fn encode(&self, spec: &EncodingSpec) -> RssImplementation {
        let take = (spec.beta * self.ranked.len() as f64).ceil() as usize;
        let b = TroublesomeSet::in_order(self.ranked[..take.min(self.ranked.len())].to_vec());
        let mut filter = self.bloom.clone();
        let cleared = retouch::apply(
            spec.algorithm,
            &mut filter,
            &self.members,
            &b,
            &self.ranked,
            derive_seed(spec.seed, 1),
        );
        let summary = RetouchSummary {
            beta: spec.beta,
            algorithm: spec.algorithm,
            false_positives: self.ranked.len(),
            troublesome: b.len(),
            bits_reset: cleared.bits_reset(),
            false_negatives: self.members.iter().filter(|&&a| !filter.contains(a)).count(),
        };
        RssImplementation {
            kind: RssKind::Rbf,
            rss: self.rss.clone(),
            filter: Some(filter),
            retouch: Some(summary),
        }
    }
}

/// Encodes `rss` as a list, a Bloom filter, or a retouched Bloom filter.
///
/// For an RBF the learning cycle is replayed against the plain filter; the
/// false positives met there (learning-cycle nodes outside the stop set,
/// destinations excluded) are ranked by how many traces they stopped short,
/// ties by key, and the top `⌈β·|F_P|⌉` form `B`, processed in rank order.
/// With `β = 0` the result answers exactly like the Bloom encoding.
pub fn encode_rss(rss: &BTreeSet<Key>, learning: &[TraceRoute], spec: &EncodingSpec) -> Result<RssImplementation> {
    spec.validate()?;
    match spec.kind {
        RssKind::List => Ok(RssImplementation {
            kind: RssKind::List,
            rss: rss.iter().copied().collect(),
            filter: None,
            retouch: None,
        }),
        RssKind::Bloom => Ok(RssImplementation {
            kind: RssKind::Bloom,
            rss: rss.iter().copied().collect(),
            filter: Some(BloomFilter::from_keys(
                FilterParams::new(spec.m, spec.k, spec.seed)?,
                rss.iter().copied(),
            )?),
            retouch: None,
        }),
        RssKind::Rbf => Ok(Retoucher::new(rss, learning, spec)?.encode(spec)),
    }
}

/// How one trace ended under the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    StoppingShort,
    Collision,
    NoStop,
}

/// Metrics of one replayed round. Rates are fractions of `traces`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub traces: usize,
    pub success: usize,
    pub stopping_short: usize,
    pub collision: usize,
    pub no_stop: usize,
    /// Share of the nodes the list encoding discovers that this one misses.
    pub nodes_missed: f64,
    pub links_missed: f64,
    /// Stop-short count per key that caused one.
    pub troublesomeness: BTreeMap<Key, usize>,
}

impl RoundMetrics {
    fn rate(&self, count: usize) -> f64 {
        if self.traces == 0 {
            0.0
        } else {
            count as f64 / self.traces as f64
        }
    }

    pub fn success_rate(&self) -> f64 {
        self.rate(self.success)
    }

    pub fn stopping_short_rate(&self) -> f64 {
        self.rate(self.stopping_short)
    }

    pub fn collision_rate(&self) -> f64 {
        self.rate(self.collision)
    }

    pub fn no_stop_rate(&self) -> f64 {
        self.rate(self.no_stop)
    }

    /// Degree → number of keys with that troublesomeness degree.
    pub fn troublesomeness_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &d in self.troublesomeness.values() {
            *h.entry(d).or_insert(0) += 1;
        }
        h
    }
}

/// Hops the stopping rule may test: never the monitor's own first hop, and
/// never the destination itself.
fn tested_hops(trace: &TraceRoute) -> &[Key] {
    let end = if trace.reached() { trace.hops.len() - 1 } else { trace.hops.len() };
    if end <= 1 {
        &[]
    } else {
        &trace.hops[1..end]
    }
}

/// Index into `hops` where probing stops, if any hop tests positive.
fn stop_index(trace: &TraceRoute, imp: &RssImplementation) -> Option<usize> {
    tested_hops(trace).iter().position(|&h| imp.contains(h)).map(|i| i + 1)
}

/// Classifies a trace given where it stopped.
pub fn classify(trace: &TraceRoute, stop: Option<usize>) -> Outcome {
    match (trace.reached(), stop) {
        (true, Some(i)) if i + 2 == trace.hops.len() => Outcome::Success,
        (_, Some(_)) => Outcome::StoppingShort,
        (true, None) => Outcome::Collision,
        (false, None) => Outcome::NoStop,
    }
}

/// Hops actually probed: up to and including the stop, or the whole trace.
fn discovered(trace: &TraceRoute, stop: Option<usize>) -> &[Key] {
    match stop {
        Some(i) => &trace.hops[..=i],
        None => &trace.hops,
    }
}

/// Replays `cycle` under the stopping rule of `imp`.
pub fn replay_probing(cycle: &[TraceRoute], imp: &RssImplementation) -> RoundMetrics {
    let reference = imp.reference();
    let stops: Vec<(Option<usize>, Option<usize>)> = cycle
        .par_iter()
        .map(|t| (stop_index(t, imp), stop_index(t, &reference)))
        .collect();

    let mut m = RoundMetrics {
        traces: cycle.len(),
        ..Default::default()
    };
    let mut nodes_ref = HashSet::new();
    let mut nodes_imp = HashSet::new();
    let mut links_ref = HashSet::new();
    let mut links_imp = HashSet::new();
    for (t, &(stop, ref_stop)) in cycle.iter().zip(&stops) {
        match classify(t, stop) {
            Outcome::Success => m.success += 1,
            Outcome::StoppingShort => {
                m.stopping_short += 1;
                *m.troublesomeness.entry(t.hops[stop.expect("stopped")]).or_insert(0) += 1;
            }
            Outcome::Collision => m.collision += 1,
            Outcome::NoStop => m.no_stop += 1,
        }
        let seen = discovered(t, stop);
        nodes_imp.extend(seen.iter().copied());
        links_imp.extend(seen.windows(2).map(|w| (w[0], w[1])));
        let seen = discovered(t, ref_stop);
        nodes_ref.extend(seen.iter().copied());
        links_ref.extend(seen.windows(2).map(|w| (w[0], w[1])));
    }
    m.nodes_missed = missed(&nodes_ref, &nodes_imp);
    m.links_missed = missed(&links_ref, &links_imp);
    m
}

fn missed<T: std::hash::Hash + Eq>(reference: &HashSet<T>, found: &HashSet<T>) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    reference.iter().filter(|x| !found.contains(x)).count() as f64 / reference.len() as f64
}

fn probe_cycle(corpus: &PathCorpus, index: usize) -> Result<&[TraceRoute]> {
    corpus.cycle(index).ok_or(Error::InsufficientCycles {
        needed: index + 1,
        available: corpus.cycles.len(),
    })
}

/// RBF metrics on cycle `probe` for each β, stop set learned from cycle 0.
/// `spec.beta` and `spec.kind` are ignored.
pub fn beta_sweep(corpus: &PathCorpus, spec: &EncodingSpec, betas: &[f64], probe: usize) -> Result<Vec<RoundMetrics>> {
    let learning = probe_cycle(corpus, 0)?;
    let cycle = probe_cycle(corpus, probe)?;
    let base = EncodingSpec {
        kind: RssKind::Rbf,
        ..*spec
    };
    for &beta in betas {
        base.with_beta(beta).validate()?;
    }
    let rss = build_rss(learning);
    let retoucher = Retoucher::new(&rss, learning, &base)?;
    Ok(betas
        .iter()
        .map(|&beta| replay_probing(cycle, &retoucher.encode(&base.with_beta(beta))))
        .collect())
}

/// Learns once from cycle 0 and replays cycles `1..=cycles`.
pub fn multi_cycle_replay(corpus: &PathCorpus, spec: &EncodingSpec, cycles: usize) -> Result<Vec<RoundMetrics>> {
    if corpus.cycles.len() < cycles + 1 {
        return Err(Error::InsufficientCycles {
            needed: cycles + 1,
            available: corpus.cycles.len(),
        });
    }
    let learning = &corpus.cycles[0];
    let imp = encode_rss(&build_rss(learning), learning, spec)?;
    Ok(corpus.cycles[1..=cycles].iter().map(|c| replay_probing(c, &imp)).collect())
}

pub const METRICS_CSV_HEADER: &str = "impl,m,beta,cycle,success,stopping_short,collision,nodes_missed,links_missed";

/// One metrics CSV row. Lists leave `m` and `beta` empty; Bloom filters
/// report `beta` as 0.
pub fn metrics_csv_row(spec: &EncodingSpec, cycle: usize, m: &RoundMetrics) -> String {
    let (bits, beta) = match spec.kind {
        RssKind::List => (String::new(), String::new()),
        RssKind::Bloom => (spec.m.to_string(), "0".to_string()),
        RssKind::Rbf => (spec.m.to_string(), spec.beta.to_string()),
    };
    format!(
        "{},{bits},{beta},{cycle},{},{},{},{},{}",
        spec.kind,
        m.success_rate(),
        m.stopping_short_rate(),
        m.collision_rate(),
        m.nodes_missed,
        m.links_missed
    )
}
