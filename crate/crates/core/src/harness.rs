//! Monte-Carlo harness for clearing experiments.
//!
//! One trial draws a fresh member set `A` from the integer universe
//! `[0, N)`, builds a filter with fresh hash functions, and finds `F_P` by
//! testing every key of `U - A`. Each β then samples `B` from `F_P` and runs
//! the clearing algorithm on its own copy of the trial's filter, so all β
//! values (and all algorithms) within a trial see the same population.
//!
//! Seeds: trial `t` uses `derive_seed(master_seed, t)`; the member draw, hash
//! seed, per-β sampling and per-β clearing each take a further sub-stream.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::MetricsReport;
use crate::error::{Error, Result};
use crate::filter::{BloomFilter, FilterParams};
use crate::hash::{derive_seed, Key};
use crate::retouch::{self, Algorithm, ClearingOutcome, TroublesomeSet};
use crate::stats::student_t_ci;

/// Default β grid for clearing experiments.
pub const DEFAULT_BETAS: [f64; 8] = [0.01, 0.02, 0.05, 0.10, 0.25, 0.50, 0.75, 1.00];

const STREAM_MEMBERS: u64 = 0;
const STREAM_HASH: u64 = 1;
const STREAM_SAMPLE: u64 = 1_000;
const STREAM_CLEAR: u64 = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `N`, universe size; keys are `0..N`.
    pub universe: u64,
    /// `n = |A|`.
    pub members: usize,
    pub m: usize,
    pub k: u32,
    pub master_seed: u64,
    pub betas: Vec<f64>,
    pub trials: usize,
    pub algorithm: Algorithm,
}

impl ExperimentConfig {
    /// `N = 2e5, n = 1e3, m = 1e4, k = 5`: same `m/n` as the full-size run,
    /// exhaustive scan in well under a second per trial.
    pub fn desk(algorithm: Algorithm) -> Self {
        Self {
            universe: 200_000,
            members: 1_000,
            m: 10_000,
            k: 5,
            master_seed: 1,
            betas: DEFAULT_BETAS.to_vec(),
            trials: 15,
            algorithm,
        }
    }

    /// `N = 2e6, n = 1e4, m = 1e5, k = 5`.
    pub fn paper(algorithm: Algorithm) -> Self {
        Self {
            universe: 2_000_000,
            members: 10_000,
            m: 100_000,
            ..Self::desk(algorithm)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members as u64 >= self.universe {
            return Err(Error::config(
                "members",
                format!("n = {} must be below N = {}", self.members, self.universe),
            ));
        }
        if self.trials < 2 {
            return Err(Error::config("trials", "at least 2 trials are needed for an interval"));
        }
        if self.betas.is_empty() {
            return Err(Error::config("betas", "no beta values given"));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
            return Err(Error::config("betas", format!("beta {b} outside (0, 1]")));
        }
        FilterParams::new(self.m, self.k, 0).map_err(|e| Error::config("m/k", e.to_string()))?;
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.master_seed, trial as u64)
    }
}

/// One trial's `A`, filter, and `F_P` (ascending).
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Key>,
    pub filter: BloomFilter,
    pub false_positives: Vec<Key>,
    pub non_members: usize,
}

pub fn build_trial_population(config: &ExperimentConfig, trial: usize) -> Result<Population> {
    let seed = config.trial_seed(trial);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_MEMBERS));
    let universe = usize::try_from(config.universe)
        .map_err(|_| Error::config("universe", "does not fit in memory"))?;
    let mut members: Vec<Key> = index::sample(&mut rng, universe, config.members)
        .into_iter()
        .map(|i| Key(i as u64))
        .collect();
    members.sort_unstable();

    let params = FilterParams::new(config.m, config.k, derive_seed(seed, STREAM_HASH))?;
    let filter = BloomFilter::from_keys(params, members.iter().copied())?;

    let mut is_member = vec![false; universe];
    for a in &members {
        is_member[a.0 as usize] = true;
    }
    let false_positives: Vec<Key> = (0..config.universe)
        .map(Key)
        .filter(|k| !is_member[k.0 as usize] && filter.contains(*k))
        .collect();
    Ok(Population {
        non_members: universe - members.len(),
        members,
        filter,
        false_positives,
    })
}

/// Draws `B` uniformly without replacement from `F_P`.
///
/// `|B| = round(beta * |F_P|)`, at least 1; `beta = 1` gives `B = F_P`.
pub fn sample_troublesome(
    false_positives: &[Key],
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TroublesomeSet> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::config("beta", format!("{beta} outside (0, 1]")));
    }
    if false_positives.is_empty() {
        return Err(Error::EmptyFalsePositives);
    }
    let len = false_positives.len();
    let count = ((beta * len as f64).round() as usize).clamp(1, len);
    let keys = index::sample(rng, len, count)
        .into_iter()
        .map(|i| false_positives[i])
        .collect();
    Ok(TroublesomeSet::sorted(keys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRecord {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub outcome: ClearingOutcome,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub false_positives: usize,
    pub non_members: usize,
    pub members: usize,
    pub fill_ratio: f64,
    pub records: Vec<BetaRecord>,
}

impl TrialResult {
    pub fn record(&self, algorithm: Algorithm, beta: f64) -> Option<&BetaRecord> {
        self.records
            .iter()
            .find(|r| r.algorithm == algorithm && r.beta == beta)
    }
}

/// Runs one trial for every algorithm in `algorithms`.
pub fn run_trial(config: &ExperimentConfig, algorithms: &[Algorithm], trial: usize) -> Result<TrialResult> {
    let wrap = |e: Error| Error::Trial {
        trial,
        source: Box::new(e),
    };
    let pop = build_trial_population(config, trial).map_err(wrap)?;
    let seed = config.trial_seed(trial);
    let mut records = Vec::with_capacity(config.betas.len() * algorithms.len());
    for (bi, &beta) in config.betas.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_SAMPLE + bi as u64));
        let b = sample_troublesome(&pop.false_positives, beta, &mut rng).map_err(wrap)?;
        let clear_seed = derive_seed(seed, STREAM_CLEAR + bi as u64);
        for &algorithm in algorithms {
            let mut filter = pop.filter.clone();
            let cleared = retouch::apply(algorithm, &mut filter, &pop.members, &b, &pop.false_positives, clear_seed);
            let outcome =
                ClearingOutcome::tally(&filter, &pop.members, &pop.false_positives, &b, &cleared);
            let fp = pop.false_positives.len();
            let metrics = MetricsReport::from_counts(
                fp,
                fp - outcome.total_removed(),
                outcome.generated_fn,
                pop.members.len(),
                pop.non_members,
                b.len(),
            );
            records.push(BetaRecord {
                algorithm,
                beta,
                outcome,
                metrics,
            });
        }
    }
    Ok(TrialResult {
        trial,
        false_positives: pop.false_positives.len(),
        non_members: pop.non_members,
        members: pop.members.len(),
        fill_ratio: pop.filter.fill_ratio(),
        records,
    })
}

/// Runs all trials (in parallel) for every algorithm, returned in trial order.
pub fn run_trials(config: &ExperimentConfig, algorithms: &[Algorithm]) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let results: Vec<Result<TrialResult>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, algorithms, t))
        .collect();
    results.into_iter().collect()
}

/// Mean and 95% half-width of one reported quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci: f64,
}

impl Estimate {
    fn of(samples: &[f64]) -> Option<Self> {
        match samples.len() {
            0 => None,
            1 => Some(Self {
                mean: samples[0],
                ci: f64::NAN,
            }),
            _ => student_t_ci(samples, 0.95)
                .ok()
                .map(|(mean, ci)| Self { mean, ci }),
        }
    }
}

/// One table row: the per-β means over trials with their intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub beta: f64,
    #[serde(rename = "mean_B")]
    pub mean_b: f64,
    #[serde(rename = "ci_B")]
    pub ci_b: f64,
    #[serde(rename = "mean_Bp")]
    pub mean_bp: f64,
    #[serde(rename = "ci_Bp")]
    pub ci_bp: f64,
    pub mean_total_removed: f64,
    pub ci_total_removed: f64,
    #[serde(rename = "mean_Ap")]
    pub mean_ap: f64,
    #[serde(rename = "ci_Ap")]
    pub ci_ap: f64,
    /// Over trials where χ is defined.
    pub mean_chi: Option<f64>,
    pub ci_chi: Option<f64>,
    pub mean_bits_reset: f64,
    pub ci_bits_reset: f64,
    /// Trials that contributed a defined χ.
    pub chi_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub rows: Vec<AggregateRow>,
}

pub const CSV_HEADER: &str = "algorithm,beta,mean_B,ci_B,mean_Bp,ci_Bp,mean_total_removed,ci_total_removed,mean_Ap,ci_Ap,mean_chi,ci_chi,mean_bits_reset,ci_bits_reset";

/// Formats a float with round-trip precision; non-finite and missing values
/// become empty fields.
pub fn fmt_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => String::new(),
    }
}

impl AggregateRow {
    pub fn csv_line(&self) -> String {
        let f = |x: f64| fmt_num(Some(x));
        [
            self.algorithm.name().to_string(),
            f(self.beta),
            f(self.mean_b),
            f(self.ci_b),
            f(self.mean_bp),
            f(self.ci_bp),
            f(self.mean_total_removed),
            f(self.ci_total_removed),
            f(self.mean_ap),
            f(self.ci_ap),
            fmt_num(self.mean_chi),
            fmt_num(self.ci_chi),
            f(self.mean_bits_reset),
            f(self.ci_bits_reset),
        ]
        .join(",")
    }
}

impl AggregateResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn row(&self, beta: f64) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.beta == beta)
    }

    /// `(β, mean χ)` points, skipping β values where χ was never defined.
    pub fn chi_series(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.mean_chi.map(|c| (r.beta, c)))
            .collect()
    }

    pub fn bits_reset_series(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.beta, r.mean_bits_reset)).collect()
    }
}

/// Two-column `beta,value` text for plotting tools.
pub fn series_csv(name: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("beta,{name}\n");
    for &(x, y) in points {
        out.push_str(&format!("{},{}\n", fmt_num(Some(x)), fmt_num(Some(y))));
    }
    out
}

/// Folds trial results in trial order into per-β estimates for `algorithm`.
pub fn aggregate(config: &ExperimentConfig, algorithm: Algorithm, trials: &[TrialResult]) -> AggregateResult {
    let rows = config
        .betas
        .iter()
        .map(|&beta| {
            let recs: Vec<&BetaRecord> = trials
                .iter()
                .filter_map(|t| t.record(algorithm, beta))
                .collect();
            let col = |f: &dyn Fn(&BetaRecord) -> f64| -> Estimate {
                let v: Vec<f64> = recs.iter().map(|r| f(r)).collect();
                Estimate::of(&v).unwrap_or(Estimate {
                    mean: f64::NAN,
                    ci: f64::NAN,
                })
            };
            let b = col(&|r| r.outcome.removed_troublesome as f64);
            let bp = col(&|r| r.outcome.side_removed as f64);
            let total = col(&|r| r.outcome.total_removed() as f64);
            let ap = col(&|r| r.outcome.generated_fn as f64);
            let bits = col(&|r| r.outcome.bits_reset as f64);
            let chis: Vec<f64> = recs.iter().filter_map(|r| r.metrics.chi).collect();
            let chi = Estimate::of(&chis);
            AggregateRow {
                algorithm,
                beta,
                mean_b: b.mean,
                ci_b: b.ci,
                mean_bp: bp.mean,
                ci_bp: bp.ci,
                mean_total_removed: total.mean,
                ci_total_removed: total.ci,
                mean_ap: ap.mean,
                ci_ap: ap.ci,
                mean_chi: chi.map(|e| e.mean),
                ci_chi: chi.map(|e| e.ci).filter(|c| c.is_finite()),
                mean_bits_reset: bits.mean,
                ci_bits_reset: bits.ci,
                chi_trials: chis.len(),
            }
        })
        .collect();
    AggregateResult {
        algorithm,
        trials: trials.len(),
        rows,
    }
}

/// Runs `config.algorithm` over all trials and aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    let trials = run_trials(config, &[config.algorithm])?;
    Ok(aggregate(config, config.algorithm, &trials))
}

/// Runs several algorithms on shared populations, one aggregate each.
pub fn run_comparison(config: &ExperimentConfig, algorithms: &[Algorithm]) -> Result<Vec<AggregateResult>> {
    let trials = run_trials(config, algorithms)?;
    Ok(algorithms
        .iter()
        .map(|&a| aggregate(config, a, &trials))
        .collect())
}
