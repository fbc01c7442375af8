//! Loading raw tweets and turning them into token streams.

mod stem;
mod tokenize;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::period::WeekKey;

pub use stem::stem;
pub use tokenize::tokenize;

/// Minimum stopword ratio for keeping a tweet that carries no language tag.
pub const MIN_STOPWORD_RATIO: f64 = 0.10;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input file not found: {0}")]
    FileNotFound(String),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: u64, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// What to do with a line that does not parse into a valid [`RawTweet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    SkipMalformed,
    FailFast,
}

/// A tweet as it appears in the input dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawTweet {
    pub id: String,
    #[serde(serialize_with = "ser_instant")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub lang: Option<String>,
    pub country: Option<String>,
    pub user_id: String,
    pub is_retweet: bool,
}

fn ser_instant<S: serde::Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&t.format("%Y-%m-%dT%H:%M:%SZ"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdField {
    Text(String),
    Number(u64),
}

#[derive(Deserialize)]
struct RawRecord {
    id: IdField,
    created_at: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    lang: Option<String>,
    #[serde(default)]
    country: Option<String>,
    #[serde(default)]
    user_id: Option<IdField>,
    #[serde(default)]
    is_retweet: bool,
}

impl IdField {
    fn into_string(self) -> String {
        match self {
            IdField::Text(s) => s,
            IdField::Number(n) => n.to_string(),
        }
    }
}

/// Accepts RFC 3339 and the classic Twitter `Wed Mar 11 10:00:00 +0000 2020` form.
/// Sub-second precision is truncated.
fn parse_instant(s: &str) -> Option<DateTime<Utc>> {
    let parsed = DateTime::parse_from_rfc3339(s)
        .or_else(|_| DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y"))
        .ok()?;
    DateTime::from_timestamp(parsed.timestamp(), 0)
}

fn is_country_code(s: &str) -> bool {
    s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase())
}

impl RawTweet {
    /// Parse and validate one JSONL line.
    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let rec: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let id = rec.id.into_string();
        if id.is_empty() {
            return Err("empty id".into());
        }
        let created_at = parse_instant(&rec.created_at)
            .ok_or_else(|| format!("unparseable created_at {:?}", rec.created_at))?;
        let country = match rec.country {
            Some(c) if c.is_empty() => None,
            Some(c) if is_country_code(&c) => Some(c),
            Some(c) => return Err(format!("invalid country code {c:?}")),
            None => None,
        };
        let lang = rec.lang.filter(|l| !l.is_empty());
        Ok(RawTweet {
            id,
            created_at,
            text: rec.text,
            lang,
            country,
            user_id: rec.user_id.map(IdField::into_string).unwrap_or_default(),
            is_retweet: rec.is_retweet,
        })
    }
}

/// A source of raw tweets. Malformed records that were skipped are reported
/// through [`TweetSource::skipped`].
pub trait TweetSource: Iterator<Item = Result<RawTweet, IngestError>> {
    fn skipped(&self) -> u64;
}

/// Line-delimited JSON reader. Blank lines are ignored; duplicate ids count as
/// malformed records.
pub struct JsonlReader<R> {
    lines: io::Lines<BufReader<R>>,
    line_no: u64,
    strictness: Strictness,
    skipped: u64,
    seen: HashSet<String>,
    done: bool,
}

impl<R: Read> JsonlReader<R> {
    pub fn new(reader: R, strictness: Strictness) -> Self {
        Self {
            lines: BufReader::new(reader).lines(),
            line_no: 0,
            strictness,
            skipped: 0,
            seen: HashSet::new(),
            done: false,
        }
    }
}

impl<R: Read> Iterator for JsonlReader<R> {
    type Item = Result<RawTweet, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    // Invalid UTF-8 on this line.
                    self.line_no += 1;
                    match self.strictness {
                        Strictness::SkipMalformed => {
                            self.skipped += 1;
                            continue;
                        }
                        Strictness::FailFast => {
                            self.done = true;
                            return Some(Err(IngestError::MalformedRecord {
                                line: self.line_no,
                                reason: "invalid UTF-8".into(),
                            }));
                        }
                    }
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = RawTweet::from_json_line(&line).and_then(|t| {
                if self.seen.insert(t.id.clone()) {
                    Ok(t)
                } else {
                    Err(format!("duplicate id {:?}", t.id))
                }
            });
            match (parsed, self.strictness) {
                (Ok(tweet), _) => return Some(Ok(tweet)),
                (Err(_), Strictness::SkipMalformed) => self.skipped += 1,
                (Err(reason), Strictness::FailFast) => {
                    self.done = true;
                    return Some(Err(IngestError::MalformedRecord {
                        line: self.line_no,
                        reason,
                    }));
                }
            }
        }
        None
    }
}

impl<R: Read> TweetSource for JsonlReader<R> {
    fn skipped(&self) -> u64 {
        self.skipped
    }
}

/// Open a JSONL tweet dump.
pub fn load_jsonl(
    path: impl AsRef<Path>,
    strictness: Strictness,
) -> Result<JsonlReader<File>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => IngestError::FileNotFound(path.display().to_string()),
        _ => IngestError::Io(e),
    })?;
    Ok(JsonlReader::new(file, strictness))
}

/// Lowercase stopword set.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn bundled() -> Self {
        Self::parse(crate::BUNDLED_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Language filter settings.
#[derive(Debug, Clone, Copy)]
pub struct LanguagePolicy<'a> {
    pub stopwords: &'a Stopwords,
    pub min_stopword_ratio: f64,
}

impl<'a> LanguagePolicy<'a> {
    pub fn new(stopwords: &'a Stopwords) -> Self {
        Self {
            stopwords,
            min_stopword_ratio: MIN_STOPWORD_RATIO,
        }
    }
}

/// Keep English-tagged tweets; for untagged tweets keep those whose
/// whitespace-separated words are at least `min_stopword_ratio` stopwords.
pub fn filter_language(tweet: &RawTweet, policy: &LanguagePolicy<'_>) -> bool {
    match tweet.lang.as_deref() {
        Some(lang) => lang == "en",
        None => {
            let lowered = tweet.text.to_lowercase();
            let mut total = 0usize;
            let mut hits = 0usize;
            for word in lowered.split_whitespace() {
                total += 1;
                if policy.stopwords.contains(word) {
                    hits += 1;
                }
            }
            total > 0 && hits as f64 / total as f64 >= policy.min_stopword_ratio
        }
    }
}

/// A tweet reduced to its bucketing keys and token streams.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedTweet {
    pub id: String,
    pub day: NaiveDate,
    pub week: WeekKey,
    pub country: Option<String>,
    /// Lowercase tokens used for lexicon and phrase matching.
    pub surface_tokens: Vec<String>,
    /// Porter stems of the non-stopword surface tokens, used for topics.
    pub stemmed_tokens: Vec<String>,
}

pub fn preprocess(raw: &RawTweet, stopwords: &Stopwords) -> ProcessedTweet {
    let surface_tokens = tokenize(&raw.text);
    let stemmed_tokens = surface_tokens
        .iter()
        .filter(|t| !stopwords.contains(t))
        .map(|t| stem(t))
        .collect();
    let day = raw.created_at.date_naive();
    ProcessedTweet {
        id: raw.id.clone(),
        day,
        week: WeekKey::of(day),
        country: raw.country.clone(),
        surface_tokens,
        stemmed_tokens,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    /// Non-blank records read from the source.
    pub loaded: u64,
    pub skipped: u64,
    pub filtered: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub tweets: Vec<ProcessedTweet>,
    pub counts: CorpusCounts,
}

impl Corpus {
    /// Drain a source, filter by language and preprocess the kept tweets.
    /// Tweet order follows the source.
    pub fn ingest<S: TweetSource>(mut source: S, stopwords: &Stopwords) -> Result<Self, IngestError> {
        let raw: Vec<RawTweet> = source.by_ref().collect::<Result<_, _>>()?;
        let policy = LanguagePolicy::new(stopwords);
        let processed: Vec<Option<ProcessedTweet>> = raw
            .par_iter()
            .map(|t| filter_language(t, &policy).then(|| preprocess(t, stopwords)))
            .collect();
        let filtered = processed.iter().filter(|p| p.is_none()).count() as u64;
        let tweets: Vec<ProcessedTweet> = processed.into_iter().flatten().collect();
        let skipped = source.skipped();
        Ok(Corpus {
            counts: CorpusCounts {
                loaded: tweets.len() as u64 + skipped + filtered,
                skipped,
                filtered,
            },
            tweets,
        })
    }

    pub fn from_tweets(tweets: Vec<ProcessedTweet>) -> Self {
        let counts = CorpusCounts {
            loaded: tweets.len() as u64,
            ..Default::default()
        };
        Corpus { tweets, counts }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// SHA-256 over the canonical JSON of every tweet, in order.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tweets {
            let line = serde_json::to_vec(t).expect("processed tweets always serialize");
            hasher.update(&line);
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}
