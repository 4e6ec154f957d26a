//! Red stop set simulation.
//!
//! A red stop set (RSS) holds the penultimate node of every destination seen
//! in a learning round. Later probing rounds stop a trace at the first hop the
//! RSS reports, which is a success at the penultimate node, stopping short
//! before it, and a collision when the trace runs into the destination.
//! Encoding the RSS in a Bloom filter makes it cheap to share but its false
//! positives stop traces short; retouching clears the worst of them.

mod corpus;
mod sim;

pub use corpus::{
    corpus_to_string, generate_corpus, ingest_corpus, parse_corpus, write_corpus, PathCorpus,
    SyntheticTopologyConfig, TraceRoute,
};
pub use sim::{
    beta_sweep, build_rss, classify, encode_rss, metrics_csv_row, multi_cycle_replay, replay_probing,
    EncodingSpec, Outcome, RetouchSummary, RoundMetrics, RssImplementation, RssKind, METRICS_CSV_HEADER,
};
