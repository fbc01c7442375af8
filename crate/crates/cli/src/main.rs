//! `tweetscope`: ingest, analyze, model and serve tweet corpora.

#![forbid(unsafe_code)]

mod error;
mod layout;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tweetscope_api::ServerConfig;
use tweetscope_core::aggregate::Metric;
use tweetscope_core::synth::SynthConfig;
use tweetscope_core::topics::{LdaConfig, VocabConfig};
use tweetscope_core::{Granularity, WeekKey};

use crate::error::CliError;
use crate::stages::{ExportArgs, TopicArgs};

#[derive(Parser)]
#[command(name = "tweetscope", version, about = "Tweet sentiment, emotion, topic and controversy analytics")]
struct Cli {
    /// Log filter, e.g. `debug` or `tweetscope_core=debug`. Overrides RUST_LOG.
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a JSONL tweet dump and write the processed corpus, one file per ISO week.
    Ingest {
        input: PathBuf,
        /// Data directory to create or update.
        #[arg(long)]
        out: PathBuf,
        /// Stopword list, one word per line (default: bundled English list).
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Abort on the first malformed record instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Score sentiment and emotions and build the aggregate snapshot.
    Analyze {
        dir: PathBuf,
        /// AFINN-format lexicon (default: bundled AFINN-111).
        #[arg(long)]
        afinn: Option<PathBuf>,
        /// NRC word-level TSV lexicon (default: bundled).
        #[arg(long)]
        nrc: Option<PathBuf>,
    },
    /// Fit one LDA model per ISO week.
    Topics(TopicsCmd),
    /// Scan for controversial terms and compute breakdowns and co-occurrence.
    Controversy {
        dir: PathBuf,
        /// Term list, one phrase per line (default: bundled list).
        #[arg(long)]
        terms: Option<PathBuf>,
    },
    /// Serve the directory's artifacts over HTTP.
    Serve {
        /// Data directory (default: `data_dir` from the config, else `.`).
        dir: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<std::net::IpAddr>,
        /// Config file with `port`, `bind`, `data_dir` and `cors_origin` keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cors_origin: Option<String>,
    },
    /// Write one series from the snapshot as CSV.
    Export {
        dir: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = GranularityArg::Week)]
        granularity: GranularityArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        country: Option<String>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic JSONL corpus with planted signals.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        tweets: usize,
        #[arg(long, default_value_t = 6)]
        weeks: u32,
        #[arg(long, default_value = "2020-W08")]
        first_week: WeekKey,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct TopicsCmd {
    dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Document-topic prior (default: 50/K).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    min_df: u64,
    #[arg(long, default_value_t = 0.5)]
    max_df: f64,
    /// Include θ and φ in the export.
    #[arg(long)]
    matrices: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Volume,
    Sentiment,
    Emotions,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Day,
    Week,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { input, out, stopwords, strict } => {
            stages::ingest(&input, &out, stopwords.as_deref(), strict)
        }
        Command::Analyze { dir, afinn, nrc } => stages::analyze(&dir, afinn.as_deref(), nrc.as_deref()),
        Command::Topics(t) => {
            let defaults = LdaConfig::with_topics(t.k);
            let lda = LdaConfig {
                topics: t.k,
                alpha: t.alpha.unwrap_or(defaults.alpha),
                beta: t.beta,
                iterations: t.iters,
                burn_in: t.burn_in,
                seed: t.seed,
            };
            let vocab = VocabConfig { min_df: t.min_df, max_df_ratio: t.max_df };
            stages::topics(&t.dir, TopicArgs { lda, vocab, matrices: t.matrices })
        }
        Command::Controversy { dir, terms } => stages::controversy(&dir, terms.as_deref()),
        Command::Serve { dir, port, bind, config, cors_origin } => {
            let mut cfg = match &config {
                Some(p) => ServerConfig::load(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
                None => ServerConfig::default(),
            };
            cfg = cfg.with_process_env().map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(d) = dir {
                cfg.data_dir = d;
            }
            if let Some(p) = port {
                cfg.port = p;
            }
            if let Some(b) = bind {
                cfg.bind = b;
            }
            if cors_origin.is_some() {
                cfg.cors_origin = cors_origin;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            rt.block_on(tweetscope_api::serve(cfg)).map_err(|e| match e {
                tweetscope_api::ServeError::Config(c) => CliError::Usage(c.to_string()),
                tweetscope_api::ServeError::Io(io) => CliError::Internal(io.to_string()),
            })
        }
        Command::Export { dir, metric, granularity, format: Format::Csv, from, to, country, out } => {
            let metric = match metric {
                MetricArg::Volume => Metric::Volume,
                MetricArg::Sentiment => Metric::Sentiment,
                MetricArg::Emotions => Metric::Emotions,
            };
            let granularity = match granularity {
                GranularityArg::Day => Granularity::Day,
                GranularityArg::Week => Granularity::Week,
            };
            stages::export(&dir, ExportArgs { metric, granularity, from, to, country, out })
        }
        Command::Generate { out, tweets, weeks, first_week, seed } => {
            stages::generate_fixture(&out, &SynthConfig { tweets, weeks, first_week, seed })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if let Some(filter) = &cli.log {
        logger.parse_filters(filter);
    }
    logger.format_timestamp(None).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
