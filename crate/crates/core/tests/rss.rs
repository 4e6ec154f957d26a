use std::collections::BTreeSet;

use rbf_core::rss::{
    beta_sweep, build_rss, classify, corpus_to_string, encode_rss, generate_corpus, multi_cycle_replay,
    parse_corpus, replay_probing, EncodingSpec, Outcome, PathCorpus, RssKind, SyntheticTopologyConfig,
};
use rbf_core::Error;

fn corpus(seed: u64, dynamics: f64, cycles: usize) -> PathCorpus {
    let config = SyntheticTopologyConfig {
        dynamics_rate: dynamics,
        cycles,
        ..Default::default()
    };
    generate_corpus(&config, seed).unwrap()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn rss_is_the_set_of_penultimate_hops() {
    let c = corpus(1, 0.05, 2);
    let learning = c.cycle(0).unwrap();
    let mut naive = BTreeSet::new();
    for t in learning {
        if t.hops.last() == Some(&t.destination) && t.hops.len() >= 2 {
            naive.insert(t.hops[t.hops.len() - 2]);
        }
    }
    assert_eq!(build_rss(learning), naive);
    assert!(!naive.is_empty());
}

#[test]
fn replay_matches_a_direct_count() {
    let c = corpus(2, 0.05, 2);
    let learning = c.cycle(0).unwrap();
    let rss = build_rss(learning);
    for spec in [EncodingSpec::list(), EncodingSpec::bloom(3000, 5, 9), EncodingSpec::rbf(3000, 5, 9, 0.25)] {
        let imp = encode_rss(&rss, learning, &spec).unwrap();
        let probe = c.cycle(1).unwrap();
        let metrics = replay_probing(probe, &imp);
        let (mut success, mut short, mut collision, mut none) = (0, 0, 0, 0);
        for t in probe {
            let reached = t.hops.last() == Some(&t.destination);
            let last = if reached { t.hops.len() - 1 } else { t.hops.len() };
            let stop = (1..last).find(|&i| imp.contains(t.hops[i]));
            match (reached, stop) {
                (true, Some(i)) if i == t.hops.len() - 2 => success += 1,
                (_, Some(_)) => short += 1,
                (true, None) => collision += 1,
                (false, None) => none += 1,
            }
            assert_eq!(
                classify(t, stop),
                match (reached, stop) {
                    (true, Some(i)) if i == t.hops.len() - 2 => Outcome::Success,
                    (_, Some(_)) => Outcome::StoppingShort,
                    (true, None) => Outcome::Collision,
                    (false, None) => Outcome::NoStop,
                }
            );
        }
        assert_eq!(
            (metrics.success, metrics.stopping_short, metrics.collision, metrics.no_stop),
            (success, short, collision, none),
            "{}",
            spec.kind
        );
        assert_eq!(metrics.traces, probe.len());
        assert_eq!(metrics.troublesomeness.values().sum::<usize>(), metrics.stopping_short);
    }
}

#[test]
fn list_on_a_static_topology_always_succeeds() {
    let c = corpus(3, 0.0, 4);
    let metrics = multi_cycle_replay(&c, &EncodingSpec::list(), 3).unwrap();
    for m in metrics {
        assert_eq!(m.success_rate(), 1.0);
        assert_eq!(m.nodes_missed, 0.0);
        assert_eq!(m.links_missed, 0.0);
    }
}

#[test]
fn bloom_never_collides_more_than_list() {
    // A Bloom filter only adds positives, so each trace stops no later.
    let c = corpus(4, 0.05, 2);
    let learning = c.cycle(0).unwrap();
    let rss = build_rss(learning);
    let list = replay_probing(c.cycle(1).unwrap(), &encode_rss(&rss, learning, &EncodingSpec::list()).unwrap());
    let bloom = replay_probing(
        c.cycle(1).unwrap(),
        &encode_rss(&rss, learning, &EncodingSpec::bloom(2000, 5, 1)).unwrap(),
    );
    assert!(bloom.collision <= list.collision);
    assert!(bloom.stopping_short >= list.stopping_short);
}

#[test]
fn retouched_beats_bloom_at_every_size() {
    let seeds = 0..4u64;
    for m in [2000, 4000, 6000, 8000] {
        let (mut rbf, mut bloom) = (Vec::new(), Vec::new());
        for seed in seeds.clone() {
            let c = corpus(100 + seed, 0.05, 2);
            bloom.extend(multi_cycle_replay(&c, &EncodingSpec::bloom(m, 5, seed), 1).unwrap());
            rbf.extend(multi_cycle_replay(&c, &EncodingSpec::rbf(m, 5, seed, 0.25), 1).unwrap());
        }
        let success = |v: &[rbf_core::rss::RoundMetrics]| mean(v.iter().map(|x| x.success_rate()));
        let short = |v: &[rbf_core::rss::RoundMetrics]| mean(v.iter().map(|x| x.stopping_short_rate()));
        assert!(success(&rbf) > success(&bloom), "m {m}: {} vs {}", success(&rbf), success(&bloom));
        assert!(short(&rbf) < short(&bloom), "m {m}");
    }
}

#[test]
fn bloom_success_grows_with_m() {
    let corpora: Vec<PathCorpus> = (0..3).map(|s| corpus(200 + s, 0.05, 2)).collect();
    let rates: Vec<f64> = [1000, 2000, 4000, 8000, 16000]
        .iter()
        .map(|&m| {
            mean(corpora.iter().enumerate().map(|(s, c)| {
                multi_cycle_replay(c, &EncodingSpec::bloom(m, 5, s as u64), 1).unwrap()[0].success_rate()
            }))
        })
        .collect();
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
}

#[test]
fn beta_sweep_trends_per_corpus() {
    let betas = [0.0001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0];
    for seed in 0..3 {
        let c = corpus(300 + seed, 0.05, 2);
        let sweep = beta_sweep(&c, &EncodingSpec::bloom(6000, 5, seed), &betas, 1).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].stopping_short <= w[0].stopping_short, "seed {seed}");
            assert!(w[1].collision >= w[0].collision, "seed {seed}");
        }
    }
}

#[test]
fn retouching_targets_the_worst_false_positives() {
    let c = corpus(5, 0.05, 2);
    let learning = c.cycle(0).unwrap();
    let rss = build_rss(learning);
    let imp = encode_rss(&rss, learning, &EncodingSpec::rbf(4000, 5, 2, 0.1)).unwrap();
    let summary = imp.retouch().unwrap();
    assert!(summary.troublesome >= 1);
    assert!(summary.bits_reset <= summary.troublesome);
    let bloom = encode_rss(&rss, learning, &EncodingSpec::bloom(4000, 5, 2)).unwrap();
    let before = replay_probing(learning, &bloom);
    let after = replay_probing(learning, &imp);
    // The most troublesome key in the learning round is gone.
    let (&worst, _) = before.troublesomeness.iter().max_by_key(|(k, v)| (**v, std::cmp::Reverse(**k))).unwrap();
    assert!(bloom.contains(worst) && !imp.contains(worst));
    assert!(after.stopping_short < before.stopping_short);
    // False negatives reported match the stop set entries the filter lost.
    let lost = rss.iter().filter(|&&r| !imp.contains(r)).count();
    assert_eq!(summary.false_negatives, lost);
}

#[test]
fn dynamics_degrade_list_and_rbf_alike() {
    let c = corpus(6, 0.1, 5);
    let list = multi_cycle_replay(&c, &EncodingSpec::list(), 4).unwrap();
    let rbf = multi_cycle_replay(&c, &EncodingSpec::rbf(6000, 5, 6, 0.25), 4).unwrap();
    assert!(list.last().unwrap().success_rate() < list[0].success_rate());
    assert!(rbf.last().unwrap().success_rate() < rbf[0].success_rate());
}

#[test]
fn too_few_cycles_is_an_error() {
    let c = corpus(7, 0.05, 2);
    assert!(matches!(
        multi_cycle_replay(&c, &EncodingSpec::list(), 2),
        Err(Error::InsufficientCycles { needed: 3, available: 2 })
    ));
}

#[test]
fn generated_corpus_round_trips_through_text() {
    let c = corpus(8, 0.05, 2);
    let text = corpus_to_string(&c);
    assert_eq!(parse_corpus(&text).unwrap(), c);
    assert_eq!(corpus(8, 0.05, 2), c);
    assert_ne!(corpus(9, 0.05, 2), c);
}

#[test]
fn malformed_corpus_lines_are_reported() {
    let err = parse_corpus("# header\n0\t1\t5\t1,2,5\n0\t1\tnot-a-key\t1,2\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    assert!(matches!(parse_corpus("0\t1\t5\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_corpus("# nothing\n\n"), Err(Error::Parse { .. })));
}

#[test]
fn kinds_parse_by_name() {
    for kind in RssKind::ALL {
        assert_eq!(kind.name().parse::<RssKind>().unwrap(), kind);
    }
    assert!("tree".parse::<RssKind>().is_err());
}
