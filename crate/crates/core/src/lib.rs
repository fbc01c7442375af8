//! Batch analytics over tweet corpora.
//!
//! The pipeline runs in stages that each live in their own module:
//!
//! - [`ingest`]: JSONL loading, language filtering, tokenization and Porter stemming.
//! - [`lexicon`]: AFINN sentiment and NRC emotion lexicons.
//! - [`affect`]: per-tweet sentiment and emotion scores.
//! - [`topics`]: weekly LDA fitted by collapsed Gibbs sampling.
//! - [`controversy`]: controversial phrase tracking, country breakdowns and co-occurrence.
//! - [`aggregate`]: day/week by country rollups, gap-filled queries and snapshot persistence.
//!
//! [`synth`] generates the synthetic fixture corpus used by the end-to-end tests.

#![forbid(unsafe_code)]

pub mod affect;
pub mod aggregate;
pub mod controversy;
pub mod ingest;
pub mod lexicon;
pub mod period;
pub mod synth;
pub mod topics;

pub use affect::{score_emotions, score_sentiment, EmotionVector, SentimentScore};
pub use ingest::{Corpus, CorpusCounts, ProcessedTweet, RawTweet};
pub use lexicon::{Emotion, EmotionLexicon, SentimentLexicon};
pub use period::{Granularity, WeekKey};

/// Stopword list shipped with the crate, one lowercase word per line.
pub const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
/// AFINN-111 sentiment lexicon.
pub const BUNDLED_AFINN: &str = include_str!("../data/lexicons/AFINN-111.txt");
/// NRC word-level emotion lexicon, restricted to words with at least one association.
pub const BUNDLED_NRC: &str = include_str!("../data/lexicons/nrc_emolex_wordlevel.tsv");
/// Default controversial term list.
pub const BUNDLED_TERMS: &str = include_str!("../data/controversy_terms.txt");
/// The 2,000-tweet synthetic corpus produced by [`synth::generate`] with default settings.
pub const BUNDLED_FIXTURE: &str = include_str!("../data/fixtures/synthetic_2000.jsonl");
