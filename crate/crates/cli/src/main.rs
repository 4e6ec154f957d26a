//! `rbf`: analytic curves, clearing experiments and stop-set replays.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for failures
//! while running. Nothing is written unless the whole run succeeds.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ClearingArgs, CorpusArgs, CurvesArgs, ImprovedArgs, RssArgs};
use config::{pick, Common, ConfigError, FileConfig, Format, Scale, DEFAULT_OUT, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "rbf", version, about = "Retouched Bloom filter experiments")]
struct Cli {
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// desk: N=2e5, n=1e3, m=1e4; paper: N=2e6, n=1e4, m=1e5
    #[arg(long, global = true, value_enum)]
    scale: Option<Scale>,
    /// Same as `--scale paper`
    #[arg(long, global = true, conflicts_with = "scale")]
    paper_scale: bool,
    /// TOML file; flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// False-positive rate against k, m and n
    Curves(CurvesArgs),
    /// Randomized and standard selective clearing over β
    Clearing(ClearingArgs),
    /// Standard against improved selective clearing
    Improved(ImprovedArgs),
    /// Stop-set replay with list, Bloom and retouched encodings
    Rss(RssArgs),
    /// Write a synthetic route-trace corpus
    GenCorpus(CorpusArgs),
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => FileConfig::default(),
    };
    let common = Common {
        seed: pick(cli.seed, file.seed, DEFAULT_SEED),
        out: pick(cli.out.clone(), file.out.clone(), PathBuf::from(DEFAULT_OUT)),
        format: pick(cli.format, file.format, Format::Csv),
        scale: pick(cli.scale.or(cli.paper_scale.then_some(Scale::Paper)), file.scale, Scale::Desk),
    };
    let outputs = match &cli.command {
        Command::Curves(a) => commands::curves(&common, a, &file)?,
        Command::Clearing(a) => commands::clearing(&common, a, &file)?,
        Command::Improved(a) => commands::improved(&common, a, &file)?,
        Command::Rss(a) => commands::rss(&common, a, &file)?,
        Command::GenCorpus(a) => commands::gen_corpus(&common, a, &file)?,
    };
    outputs.commit(&common.out)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<rbf_core::Error>() {
        Some(rbf_core::Error::InvalidConfig { .. } | rbf_core::Error::InvalidParams(_)) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
