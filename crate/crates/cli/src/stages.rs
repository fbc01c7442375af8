use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use tweetscope_core::aggregate::{
    build_snapshot_at, load_snapshot, persist, query, score_corpus, Metric, SeriesPoint,
};
use tweetscope_core::controversy::{ControversyExport, TermList};
use tweetscope_core::ingest::{load_jsonl, Stopwords, Strictness};
use tweetscope_core::lexicon::{Emotion, EmotionLexicon, SentimentLexicon};
use tweetscope_core::period::{parse_day, Period};
use tweetscope_core::synth::{generate, to_jsonl, SynthConfig};
use tweetscope_core::topics::{weekly_models, LdaConfig, TopicsExport, VocabConfig};
use tweetscope_core::{Corpus, CorpusCounts, Granularity, ProcessedTweet, WeekKey};

use crate::error::CliError;
use crate::layout::{self, CONTROVERSY_FILE, SNAPSHOT_FILE, STATS_FILE, STOPWORDS_FILE, TOPICS_FILE};
use crate::manifest::RunManifest;

/// `corpus/stats.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusStats {
    pub schema_version: u32,
    pub input: String,
    pub counts: CorpusCounts,
    pub tweets: u64,
    pub corpus_id: String,
    /// Tweets per week file.
    pub weeks: BTreeMap<WeekKey, u64>,
}

fn bundled_or(path: Option<&Path>, name: &str) -> String {
    path.map(|p| p.display().to_string())
        .unwrap_or_else(|| format!("bundled:{name}"))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn ingest(input: &Path, out: &Path, stopwords: Option<&Path>, strict: bool) -> Result<(), CliError> {
    let mut m = RunManifest::start("ingest");
    m.input(input);
    m.lexicons.push(bundled_or(stopwords, "stopwords_en.txt"));
    m.set("strict", strict);

    m.step("load");
    let stop_text = match stopwords {
        Some(p) => read_text(p)?,
        None => tweetscope_core::BUNDLED_STOPWORDS.to_string(),
    };
    let stop = Stopwords::parse(&stop_text);
    let strictness = if strict { Strictness::FailFast } else { Strictness::SkipMalformed };
    let corpus = Corpus::ingest(load_jsonl(input, strictness)?, &stop)?;
    let c = corpus.counts;
    info!(
        "loaded {} records: kept {}, skipped {} malformed, filtered {} non-English",
        c.loaded,
        corpus.len(),
        c.skipped,
        c.filtered
    );
    m.counts = Some(c);

    m.step("write");
    let corpus_dir = layout::corpus_dir(out);
    layout::ensure_dir(&corpus_dir)?;
    for entry in fs::read_dir(&corpus_dir).map_err(|e| CliError::write(&corpus_dir, e))? {
        let path = entry.map_err(|e| CliError::write(&corpus_dir, e))?.path();
        if path.extension().is_some_and(|x| x == "jsonl") {
            fs::remove_file(&path).map_err(|e| CliError::write(&path, e))?;
        }
    }
    let mut by_week: BTreeMap<WeekKey, Vec<u8>> = BTreeMap::new();
    for t in &corpus.tweets {
        let buf = by_week.entry(t.week).or_default();
        serde_json::to_writer(&mut *buf, t).map_err(|e| CliError::Internal(e.to_string()))?;
        buf.push(b'\n');
    }
    let mut weeks = BTreeMap::new();
    for (week, bytes) in &by_week {
        let path = corpus_dir.join(format!("{week}.jsonl"));
        layout::write_bytes(&path, bytes)?;
        weeks.insert(*week, bytes.iter().filter(|&&b| b == b'\n').count() as u64);
        m.output(&path);
    }
    // Read back in file order so the id matches what later stages compute.
    let ordered: Vec<ProcessedTweet> = by_week
        .values()
        .flat_map(|b| b.split(|&c| c == b'\n').filter(|l| !l.is_empty()))
        .map(|l| serde_json::from_slice(l).expect("just written"))
        .collect();
    let stats = CorpusStats {
        schema_version: 1,
        input: input.display().to_string(),
        counts: c,
        tweets: corpus.len() as u64,
        corpus_id: Corpus::from_tweets(ordered).content_hash(),
        weeks,
    };
    let stats_path = corpus_dir.join(STATS_FILE);
    layout::write_json(&stats_path, &stats)?;
    m.output(&stats_path);
    let stop_path = corpus_dir.join(STOPWORDS_FILE);
    layout::write_bytes(&stop_path, stop_text.as_bytes())?;
    m.output(&stop_path);
    m.write(out)?;
    Ok(())
}

/// The processed corpus written by `ingest`, in week-file order.
pub fn read_corpus(dir: &Path) -> Result<(Corpus, CorpusStats), CliError> {
    let corpus_dir = layout::corpus_dir(dir);
    let stats_path = corpus_dir.join(STATS_FILE);
    if !stats_path.is_file() {
        return Err(CliError::Data(format!(
            "no processed corpus found in {}; run `tweetscope ingest` first",
            dir.display()
        )));
    }
    let stats: CorpusStats = serde_json::from_str(&read_text(&stats_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", stats_path.display())))?;
    let mut tweets = Vec::with_capacity(stats.tweets as usize);
    for week in stats.weeks.keys() {
        let path = corpus_dir.join(format!("{week}.jsonl"));
        let file = fs::File::open(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let t: ProcessedTweet = serde_json::from_str(&line)
                .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
            tweets.push(t);
        }
    }
    if tweets.len() as u64 != stats.tweets {
        return Err(CliError::Data(format!(
            "{}: expected {} tweets, found {}",
            corpus_dir.display(),
            stats.tweets,
            tweets.len()
        )));
    }
    let corpus = Corpus { tweets, counts: stats.counts };
    Ok((corpus, stats))
}

/// Snapshot timestamp: `SOURCE_DATE_EPOCH` when set, for reproducible output.
fn build_time() -> Result<DateTime<Utc>, CliError> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .parse::<i64>()
            .ok()
            .and_then(|s| DateTime::from_timestamp(s, 0))
            .ok_or_else(|| CliError::Usage(format!("SOURCE_DATE_EPOCH={v:?} is not a Unix timestamp"))),
        Err(_) => Ok(DateTime::from_timestamp(Utc::now().timestamp(), 0).expect("now is valid")),
    }
}

pub fn analyze(dir: &Path, afinn: Option<&Path>, nrc: Option<&Path>) -> Result<(), CliError> {
    let mut m = RunManifest::start("analyze");
    m.step("load");
    let (corpus, stats) = read_corpus(dir)?;
    m.input(layout::corpus_dir(dir));
    m.counts = Some(stats.counts);
    let afinn_lex = match afinn {
        Some(p) => SentimentLexicon::load_afinn(p)?,
        None => SentimentLexicon::bundled(),
    };
    let nrc_lex = match nrc {
        Some(p) => EmotionLexicon::load_nrc(p)?,
        None => EmotionLexicon::bundled(),
    };
    m.lexicons.push(bundled_or(afinn, "AFINN-111.txt"));
    m.lexicons.push(bundled_or(nrc, "nrc_emolex_wordlevel.tsv"));

    m.step("score");
    let scores = score_corpus(&corpus, &afinn_lex, &nrc_lex);
    m.step("aggregate");
    let snapshot = build_snapshot_at(&corpus, &scores, build_time()?)?;
    let path = dir.join(SNAPSHOT_FILE);
    persist(&snapshot, &path).map_err(|e| CliError::write(&path, e))?;
    info!("wrote {} ({} buckets)", path.display(), snapshot.volume.len());
    m.output(&path);
    m.write(dir)?;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct TopicArgs {
    pub lda: LdaConfig,
    pub vocab: VocabConfig,
    pub matrices: bool,
}

pub fn topics(dir: &Path, args: TopicArgs) -> Result<(), CliError> {
    let mut m = RunManifest::start("topics");
    args.lda.validate()?;
    m.set("lda", args.lda);
    m.set("vocab", args.vocab);
    m.set("matrices", args.matrices);
    m.step("load");
    let (corpus, stats) = read_corpus(dir)?;
    m.input(layout::corpus_dir(dir));
    m.counts = Some(stats.counts);

    m.step("fit");
    let (models, skipped) = weekly_models(&corpus, &args.lda, &args.vocab)?;
    if models.is_empty() {
        warn!("no week had enough documents for K={}", args.lda.topics);
    }
    let export = TopicsExport::build(args.lda, args.vocab, &models, skipped, args.matrices);
    let path = dir.join(TOPICS_FILE);
    layout::write_json(&path, &export)?;
    info!("wrote {} ({} weeks)", path.display(), export.weeks.len());
    m.output(&path);
    m.write(dir)?;
    Ok(())
}

pub fn controversy(dir: &Path, terms: Option<&Path>) -> Result<(), CliError> {
    let mut m = RunManifest::start("controversy");
    m.step("load");
    let (corpus, stats) = read_corpus(dir)?;
    m.input(layout::corpus_dir(dir));
    m.counts = Some(stats.counts);
    let list = match terms {
        Some(p) => TermList::load(p)?,
        None => TermList::bundled(),
    };
    m.lexicons.push(bundled_or(terms, "controversy_terms.txt"));
    m.set("terms", list.phrases().collect::<Vec<_>>());
    let stop_path = layout::corpus_dir(dir).join(STOPWORDS_FILE);
    let stop = Stopwords::parse(&read_text(&stop_path)?);

    m.step("scan");
    let export = ControversyExport::build(&corpus, &list, &stop);
    let path = dir.join(CONTROVERSY_FILE);
    layout::write_json(&path, &export)?;
    info!("wrote {} ({} hits)", path.display(), export.total_hits);
    m.output(&path);
    m.write(dir)?;
    Ok(())
}

pub struct ExportArgs {
    pub metric: Metric,
    pub granularity: Granularity,
    pub from: Option<String>,
    pub to: Option<String>,
    pub country: Option<String>,
    pub out: Option<PathBuf>,
}

fn bound(arg: Option<String>, day: Option<String>, g: Granularity) -> Result<String, CliError> {
    if let Some(a) = arg {
        return Ok(a);
    }
    let day = day.ok_or_else(|| CliError::Data("snapshot is empty; pass --from and --to".into()))?;
    let day = parse_day(&day).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(Period::of(g, day).to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn export(dir: &Path, args: ExportArgs) -> Result<(), CliError> {
    let path = dir.join(SNAPSHOT_FILE);
    if !path.is_file() {
        return Err(CliError::Data(format!(
            "no snapshot found at {}; run `tweetscope analyze` first",
            path.display()
        )));
    }
    let snapshot = load_snapshot(&path)?;
    let meta = snapshot.meta();
    let g = args.granularity;
    let from = bound(args.from, meta.first_day.clone(), g)?;
    let to = bound(args.to, meta.last_day.clone(), g)?;
    let series = query(&snapshot, args.metric, g, &from, &to, args.country.as_deref()).map_err(|e| match e {
        tweetscope_core::aggregate::AggregateError::InvalidRange { .. }
        | tweetscope_core::aggregate::AggregateError::InvalidPeriod(_)
        | tweetscope_core::aggregate::AggregateError::RangeTooLarge(_) => CliError::Usage(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    let mut header = vec!["period".to_string(), "count".to_string()];
    match args.metric {
        Metric::Volume => {}
        Metric::Sentiment => header.extend(["mean", "positivity", "negativity"].map(String::from)),
        Metric::Emotions => header.extend(Emotion::ALL.iter().map(|e| e.as_str().to_string())),
    }
    w.write_record(&header).map_err(csv_err)?;
    for p in &series.points {
        let mut row = vec![p.period().to_string(), p.count().to_string()];
        match p {
            SeriesPoint::Volume(_) => {}
            SeriesPoint::Sentiment(s) => {
                row.extend([fmt_opt(s.mean), fmt_opt(s.positivity), fmt_opt(s.negativity)]);
            }
            SeriesPoint::Emotions(e) => {
                for emo in Emotion::ALL {
                    row.push(fmt_opt(e.emotions.map(|v| v.get(emo))));
                }
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    match args.out {
        Some(path) => layout::write_bytes(&path, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

pub fn generate_fixture(out: &Path, cfg: &SynthConfig) -> Result<(), CliError> {
    if cfg.weeks < 5 {
        return Err(CliError::Usage("--weeks must be at least 5".into()));
    }
    layout::write_bytes(out, to_jsonl(&generate(cfg)).as_bytes())?;
    info!("wrote {} tweets to {}", cfg.tweets, out.display());
    Ok(())
}
