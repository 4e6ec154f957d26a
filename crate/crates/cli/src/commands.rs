use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use rbf_core::analysis::{analytic_fpr, min_fpr, optimal_k};
use rbf_core::harness::{fmt_num, run_comparison, series_csv, AggregateResult, ExperimentConfig, DEFAULT_BETAS};
use rbf_core::rss::{
    build_rss, encode_rss, generate_corpus, ingest_corpus, metrics_csv_row, replay_probing, corpus_to_string,
    EncodingSpec, PathCorpus, RoundMetrics, RssKind, SyntheticTopologyConfig, METRICS_CSV_HEADER,
};
use rbf_core::Algorithm;

use crate::config::{config_error, pick, Common, CorpusFile, FileConfig, Format, Scale};
use crate::output::{json, Outputs};

fn num(x: f64) -> String {
    fmt_num(Some(x))
}

fn nonempty<T>(field: &str, v: &[T]) -> anyhow::Result<()> {
    if v.is_empty() {
        return Err(config_error(field, "empty list"));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Filter size held fixed in the k and n sweeps
    #[arg(long)]
    pub m: Option<usize>,
    /// Element count held fixed in the k and m sweeps
    #[arg(long)]
    pub n: Option<usize>,
    /// Hash count held fixed in the m and n sweeps
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct Annotations {
    m: usize,
    n: usize,
    k: u32,
    fpr: f64,
    optimal_k_real: f64,
    optimal_k: u32,
    fpr_at_optimal_k: f64,
    min_fpr: f64,
}

pub fn curves(common: &Common, args: &CurvesArgs, file: &FileConfig) -> anyhow::Result<Outputs> {
    let f = &file.curves;
    let m = pick(args.m, f.m, 100_000);
    let n = pick(args.n, f.n, 10_000);
    let k = pick(args.k, f.k, 5);
    let k_values = pick(args.k_values.clone(), f.k_values.clone(), (1..=20).collect());
    let m_values = pick(args.m_values.clone(), f.m_values.clone(), (1..=20).map(|i| i * 10_000).collect());
    let n_values = pick(args.n_values.clone(), f.n_values.clone(), (1..=20).map(|i| i * 1_000).collect());
    nonempty("k_values", &k_values)?;
    nonempty("m_values", &m_values)?;
    nonempty("n_values", &n_values)?;
    if m == 0 || n == 0 || k == 0 {
        return Err(config_error("m/n/k", "must be positive"));
    }
    if k_values.contains(&0) || m_values.contains(&0) || n_values.contains(&0) {
        return Err(config_error("*_values", "must be positive"));
    }

    let by_k: Vec<(u32, f64)> = k_values.iter().map(|&kk| (kk, analytic_fpr(m, n, kk))).collect();
    let by_m: Vec<(usize, f64)> = m_values.iter().map(|&mm| (mm, analytic_fpr(mm, n, k))).collect();
    let by_n: Vec<(usize, f64)> = n_values.iter().map(|&nn| (nn, analytic_fpr(m, nn, k))).collect();
    let opt = optimal_k(m, n);
    let notes = Annotations {
        m,
        n,
        k,
        fpr: analytic_fpr(m, n, k),
        optimal_k_real: opt.real,
        optimal_k: opt.rounded,
        fpr_at_optimal_k: analytic_fpr(m, n, opt.rounded),
        min_fpr: min_fpr(m, n),
    };

    let mut out = Outputs::new();
    match common.format {
        Format::Csv => {
            let table = |name: &str, rows: Vec<(String, f64)>| {
                let mut s = format!("{name},fpr\n");
                for (x, y) in rows {
                    s.push_str(&format!("{x},{}\n", num(y)));
                }
                s
            };
            out.add("fp_vs_k.csv", table("k", by_k.iter().map(|&(x, y)| (x.to_string(), y)).collect()));
            out.add("fp_vs_m.csv", table("m", by_m.iter().map(|&(x, y)| (x.to_string(), y)).collect()));
            out.add("fp_vs_n.csv", table("n", by_n.iter().map(|&(x, y)| (x.to_string(), y)).collect()));
            out.add(
                "annotations.csv",
                format!(
                    "m,n,k,fpr,optimal_k_real,optimal_k,fpr_at_optimal_k,min_fpr\n{},{},{},{},{},{},{},{}\n",
                    notes.m,
                    notes.n,
                    notes.k,
                    num(notes.fpr),
                    num(notes.optimal_k_real),
                    notes.optimal_k,
                    num(notes.fpr_at_optimal_k),
                    num(notes.min_fpr)
                ),
            );
        }
        Format::Json => {
            let pts = |name: &str, v: Vec<(u64, f64)>| {
                v.into_iter()
                    .map(|(x, fpr)| serde_json::json!({ name: x, "fpr": fpr }))
                    .collect::<Vec<_>>()
            };
            out.add("fp_vs_k.json", json(&pts("k", by_k.iter().map(|&(x, y)| (x as u64, y)).collect())));
            out.add("fp_vs_m.json", json(&pts("m", by_m.iter().map(|&(x, y)| (x as u64, y)).collect())));
            out.add("fp_vs_n.json", json(&pts("n", by_n.iter().map(|&(x, y)| (x as u64, y)).collect())));
            out.add("annotations.json", json(&notes));
        }
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct ClearingArgs {
    /// Algorithm name, or `all` for randomized plus the four standard ones
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ImprovedArgs {
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
}

fn experiment(common: &Common, betas: Option<Vec<f64>>, trials: Option<usize>) -> ExperimentConfig {
    let base = match common.scale {
        Scale::Desk => ExperimentConfig::desk(Algorithm::Ratio),
        Scale::Paper => ExperimentConfig::paper(Algorithm::Ratio),
    };
    ExperimentConfig {
        master_seed: common.seed,
        betas: betas.unwrap_or_else(|| DEFAULT_BETAS.to_vec()),
        trials: trials.unwrap_or(base.trials),
        ..base
    }
}

fn add_results(out: &mut Outputs, format: Format, prefix: &str, results: &[AggregateResult]) {
    for r in results {
        let name = r.algorithm.name();
        match format {
            Format::Csv => {
                out.add(format!("{prefix}_{name}.csv"), r.to_csv());
                out.add(format!("chi_{name}.csv"), series_csv("chi", &r.chi_series()));
                out.add(format!("bits_reset_{name}.csv"), series_csv("bits_reset", &r.bits_reset_series()));
            }
            Format::Json => {
                #[derive(Serialize)]
                struct P {
                    beta: f64,
                    value: f64,
                }
                let series = |v: Vec<(f64, f64)>| v.into_iter().map(|(beta, value)| P { beta, value }).collect::<Vec<_>>();
                out.add(format!("{prefix}_{name}.json"), json(r));
                out.add(format!("chi_{name}.json"), json(&series(r.chi_series())));
                out.add(format!("bits_reset_{name}.json"), json(&series(r.bits_reset_series())));
            }
        }
    }
}

pub fn clearing(common: &Common, args: &ClearingArgs, file: &FileConfig) -> anyhow::Result<Outputs> {
    let f = &file.clearing;
    let name = pick(args.algorithm.clone(), f.algorithm.clone(), "all".to_string());
    let algorithms: Vec<Algorithm> = if name == "all" {
        std::iter::once(Algorithm::Randomized).chain(Algorithm::STANDARD).collect()
    } else {
        vec![name.parse()?]
    };
    let config = experiment(common, args.betas.clone().or(f.betas.clone()), args.trials.or(f.trials));
    config.validate()?;
    let results = run_comparison(&config, &algorithms)?;
    let mut out = Outputs::new();
    add_results(&mut out, common.format, "clearing", &results);
    Ok(out)
}

pub const IMPROVED_SET: [Algorithm; 6] = [
    Algorithm::MinFn,
    Algorithm::ImprovedMinFn,
    Algorithm::MaxFp,
    Algorithm::ImprovedMaxFp,
    Algorithm::Ratio,
    Algorithm::ImprovedRatio,
];

pub fn improved(common: &Common, args: &ImprovedArgs, file: &FileConfig) -> anyhow::Result<Outputs> {
    let f = &file.improved;
    let config = experiment(common, args.betas.clone().or(f.betas.clone()), args.trials.or(f.trials));
    config.validate()?;
    let results = run_comparison(&config, &IMPROVED_SET)?;
    let mut out = Outputs::new();
    add_results(&mut out, common.format, "improved", &results);

    // Relative χ gain of each improved variant over its standard one.
    let chi = |a: Algorithm, beta: f64| {
        results
            .iter()
            .find(|r| r.algorithm == a)
            .and_then(|r| r.row(beta))
            .and_then(|row| row.mean_chi)
    };
    let gains: Vec<BTreeMap<&str, Option<f64>>> = config
        .betas
        .iter()
        .map(|&beta| {
            let mut row = BTreeMap::new();
            row.insert("beta", Some(beta));
            for std in [Algorithm::MinFn, Algorithm::MaxFp, Algorithm::Ratio] {
                let imp = std.improved().expect("standard has improved variant");
                let gain = match (chi(std, beta), chi(imp, beta)) {
                    (Some(s), Some(i)) if s != 0.0 => Some(i / s - 1.0),
                    _ => None,
                };
                row.insert(std.name(), gain);
            }
            row
        })
        .collect();
    match common.format {
        Format::Csv => {
            let mut s = String::from("beta,min_fn,max_fp,ratio\n");
            for g in &gains {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_num(g["beta"]),
                    fmt_num(g["min_fn"]),
                    fmt_num(g["max_fp"]),
                    fmt_num(g["ratio"])
                ));
            }
            out.add("improved_gain.csv", s);
        }
        Format::Json => out.add("improved_gain.json", json(&gains)),
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct RssArgs {
    /// Encodings to replay: list, bloom, rbf
    #[arg(long, value_delimiter = ',')]
    pub kind: Option<Vec<RssKind>>,
    /// Filter sizes in bits
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Retouching fractions for rbf
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    /// Probing cycles replayed after the learning cycle
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Corpus file; a synthetic corpus is generated when absent
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<u32>,
    /// Clearing algorithm for rbf
    #[arg(long)]
    pub algorithm: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct CorpusArgs {
    #[arg(long)]
    pub monitors: Option<usize>,
    #[arg(long)]
    pub destinations: Option<usize>,
    /// Cycles to generate, the learning cycle included
    #[arg(long)]
    pub cycles: Option<usize>,
    #[arg(long)]
    pub path_length: Option<f64>,
    #[arg(long)]
    pub sharing: Option<f64>,
    #[arg(long)]
    pub dynamics: Option<f64>,
}

fn topology(common: &Common, args: &CorpusArgs, file: &CorpusFile) -> SyntheticTopologyConfig {
    let base = SyntheticTopologyConfig::default();
    let destinations = match common.scale {
        Scale::Desk => base.destination_count,
        Scale::Paper => 10_000,
    };
    SyntheticTopologyConfig {
        monitor_count: pick(args.monitors, file.monitors, base.monitor_count),
        destination_count: pick(args.destinations, file.destinations, destinations),
        mean_path_length: pick(args.path_length, file.path_length, base.mean_path_length),
        sharing_factor: pick(args.sharing, file.sharing, base.sharing_factor),
        dynamics_rate: pick(args.dynamics, file.dynamics, base.dynamics_rate),
        cycles: pick(args.cycles, file.cycles, base.cycles),
    }
}

#[derive(Serialize)]
struct RssRow {
    #[serde(rename = "impl")]
    kind: RssKind,
    m: Option<usize>,
    beta: Option<f64>,
    cycle: usize,
    success: f64,
    stopping_short: f64,
    collision: f64,
    nodes_missed: f64,
    links_missed: f64,
}

#[derive(Serialize)]
struct RssSummary {
    #[serde(rename = "impl")]
    kind: RssKind,
    m: Option<usize>,
    beta: Option<f64>,
    rss_size: usize,
    false_positives: Option<usize>,
    troublesome: Option<usize>,
    bits_reset: Option<usize>,
    false_negatives: Option<usize>,
}

pub fn rss(common: &Common, args: &RssArgs, file: &FileConfig) -> anyhow::Result<Outputs> {
    let f = &file.rss;
    let kinds: Vec<RssKind> = match (&args.kind, &f.kind) {
        (Some(k), _) => k.clone(),
        (None, Some(names)) => names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?,
        (None, None) => RssKind::ALL.to_vec(),
    };
    let step = match common.scale {
        Scale::Desk => 1_000,
        Scale::Paper => 10_000,
    };
    let ms = pick(args.m.clone(), f.m.clone(), (1..=10).map(|i| i * step).collect());
    let betas = pick(args.beta.clone(), f.beta.clone(), vec![0.01, 0.05, 0.10, 0.25]);
    let cycles = pick(args.cycles, f.cycles, 1);
    let k = pick(args.k, f.k, 5);
    let algorithm: Algorithm = pick(args.algorithm.clone(), f.algorithm.clone(), "ratio".into()).parse()?;
    nonempty("kind", &kinds)?;
    nonempty("m", &ms)?;
    nonempty("beta", &betas)?;
    if cycles == 0 {
        return Err(config_error("cycles", "must be at least 1"));
    }

    let corpus: PathCorpus = match args.corpus.clone().or(f.corpus.clone()) {
        Some(path) => ingest_corpus(&path).with_context(|| format!("reading corpus {}", path.display()))?,
        None => {
            let mut topo = topology(common, &CorpusArgs::default(), &file.corpus);
            topo.cycles = topo.cycles.max(cycles + 1);
            generate_corpus(&topo, common.seed)?
        }
    };

    let mut specs = Vec::new();
    for &kind in &kinds {
        match kind {
            RssKind::List => specs.push(EncodingSpec::list()),
            RssKind::Bloom => specs.extend(ms.iter().map(|&m| EncodingSpec::bloom(m, k, common.seed))),
            RssKind::Rbf => {
                for &m in &ms {
                    for &beta in &betas {
                        specs.push(EncodingSpec {
                            algorithm,
                            ..EncodingSpec::rbf(m, k, common.seed, beta)
                        });
                    }
                }
            }
        }
    }
    for s in &specs {
        s.validate()?;
    }

    let learning = corpus
        .cycle(0)
        .ok_or_else(|| anyhow::anyhow!("corpus has no cycles"))?;
    let rss_set = build_rss(learning);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut trouble = Vec::new();
    if corpus.cycles.len() < cycles + 1 {
        return Err(rbf_core::Error::InsufficientCycles {
            needed: cycles + 1,
            available: corpus.cycles.len(),
        }
        .into());
    }
    for spec in &specs {
        let imp = encode_rss(&rss_set, learning, spec)?;
        let series: Vec<RoundMetrics> = corpus.cycles[1..=cycles].iter().map(|c| replay_probing(c, &imp)).collect();
        let (m, beta) = match spec.kind {
            RssKind::List => (None, None),
            RssKind::Bloom => (Some(spec.m), Some(0.0)),
            RssKind::Rbf => (Some(spec.m), Some(spec.beta)),
        };
        let r = imp.retouch();
        summaries.push(RssSummary {
            kind: spec.kind,
            m,
            beta,
            rss_size: rss_set.len(),
            false_positives: r.map(|r| r.false_positives),
            troublesome: r.map(|r| r.troublesome),
            bits_reset: r.map(|r| r.bits_reset),
            false_negatives: r.map(|r| r.false_negatives),
        });
        for (i, metrics) in series.iter().enumerate() {
            rows.push((spec, i + 1, metrics.clone()));
            if spec.kind != RssKind::List && i == 0 {
                for (degree, count) in metrics.troublesomeness_histogram() {
                    trouble.push((spec.kind, m, beta, degree, count));
                }
            }
        }
    }

    let mut out = Outputs::new();
    match common.format {
        Format::Csv => {
            let mut s = format!("{METRICS_CSV_HEADER}\n");
            for (spec, cycle, m) in &rows {
                s.push_str(&metrics_csv_row(spec, *cycle, m));
                s.push('\n');
            }
            out.add("rss_metrics.csv", s);
            let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            let mut s = String::from("impl,m,beta,rss_size,false_positives,troublesome,bits_reset,false_negatives\n");
            for r in &summaries {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.kind,
                    opt(r.m),
                    fmt_num(r.beta),
                    r.rss_size,
                    opt(r.false_positives),
                    opt(r.troublesome),
                    opt(r.bits_reset),
                    opt(r.false_negatives)
                ));
            }
            out.add("rss_summary.csv", s);
            let mut s = String::from("impl,m,beta,degree,count\n");
            for (kind, m, beta, degree, count) in &trouble {
                s.push_str(&format!("{kind},{},{},{degree},{count}\n", opt(*m), fmt_num(*beta)));
            }
            out.add("troublesomeness.csv", s);
        }
        Format::Json => {
            let rows: Vec<RssRow> = rows
                .iter()
                .map(|(spec, cycle, m)| RssRow {
                    kind: spec.kind,
                    m: (spec.kind != RssKind::List).then_some(spec.m),
                    beta: match spec.kind {
                        RssKind::List => None,
                        RssKind::Bloom => Some(0.0),
                        RssKind::Rbf => Some(spec.beta),
                    },
                    cycle: *cycle,
                    success: m.success_rate(),
                    stopping_short: m.stopping_short_rate(),
                    collision: m.collision_rate(),
                    nodes_missed: m.nodes_missed,
                    links_missed: m.links_missed,
                })
                .collect();
            out.add("rss_metrics.json", json(&rows));
            out.add("rss_summary.json", json(&summaries));
            #[derive(Serialize)]
            struct T {
                #[serde(rename = "impl")]
                kind: RssKind,
                m: Option<usize>,
                beta: Option<f64>,
                degree: usize,
                count: usize,
            }
            let t: Vec<T> = trouble
                .into_iter()
                .map(|(kind, m, beta, degree, count)| T {
                    kind,
                    m,
                    beta,
                    degree,
                    count,
                })
                .collect();
            out.add("troublesomeness.json", json(&t));
        }
    }
    Ok(out)
}

pub fn gen_corpus(common: &Common, args: &CorpusArgs, file: &FileConfig) -> anyhow::Result<Outputs> {
    let topo = topology(common, args, &file.corpus);
    let corpus = generate_corpus(&topo, common.seed)?;
    let mut out = Outputs::new();
    out.add("corpus.tsv", corpus_to_string(&corpus));
    Ok(out)
}
