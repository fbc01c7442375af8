//! Weekly LDA topic models fitted by collapsed Gibbs sampling.

mod gibbs;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Corpus;
use crate::period::WeekKey;

pub use gibbs::GibbsState;

/// Length of the per-topic word lists written to topic exports.
pub const EXPORT_TOP_WORDS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("no term survives the document-frequency filter")]
    EmptyVocabulary,
    #[error("topic {topic} out of range, model has {topics} topics")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_sorted(terms: Vec<String>, doc_freq: Vec<u64>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            terms,
            doc_freq,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn doc_freq(&self, id: usize) -> u64 {
        self.doc_freq[id]
    }

    /// Map a document to vocabulary ids, dropping unknown terms.
    pub fn encode<S: AsRef<str>>(&self, doc: &[S]) -> Vec<usize> {
        doc.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }
}

/// Document-frequency bounds for vocabulary construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabConfig {
    pub min_df: u64,
    pub max_df_ratio: f64,
}

impl Default for VocabConfig {
    fn default() -> Self {
        Self {
            min_df: 5,
            max_df_ratio: 0.5,
        }
    }
}

/// Keep terms whose document frequency lies in `[min_df, max_df_ratio * docs]`,
/// sorted lexicographically.
pub fn build_vocab<S: AsRef<str>>(
    docs: &[Vec<S>],
    min_df: u64,
    max_df_ratio: f64,
) -> Result<Vocabulary, TopicError> {
    if min_df < 1 {
        return Err(TopicError::InvalidConfig("min_df must be at least 1".into()));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(TopicError::InvalidConfig("max_df_ratio must be in (0, 1]".into()));
    }
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.iter().map(AsRef::as_ref).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let max_df = max_df_ratio * docs.len() as f64;
    let (terms, freqs): (Vec<String>, Vec<u64>) = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df && n as f64 <= max_df)
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    if terms.is_empty() {
        return Err(TopicError::EmptyVocabulary);
    }
    Ok(Vocabulary::from_sorted(terms, freqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    /// Number of topics K.
    pub topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub iterations: usize,
    /// Sweeps before estimation. Estimates use the final sweep only, so this
    /// is a validated bookkeeping field.
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::with_topics(10)
    }
}

impl LdaConfig {
    /// Defaults for `k` topics: α = 50/K, β = 0.01, 1000 sweeps, 100 burn-in, seed 42.
    pub fn with_topics(k: usize) -> Self {
        Self {
            topics: k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 100,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: &str| Err(TopicError::InvalidConfig(m.into()));
        if self.topics < 1 {
            return bad("K must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.burn_in >= self.iterations {
            return bad("burn_in must be smaller than iterations");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopWord {
    pub term: String,
    pub prob: f64,
}

/// A fitted LDA model with final-sweep point estimates.
#[derive(Debug, Clone)]
pub struct LdaModel {
    pub config: LdaConfig,
    pub vocab: Vocabulary,
    pub z: Vec<Vec<usize>>,
    pub n_dk: Vec<Vec<u32>>,
    pub n_kw: Vec<Vec<u32>>,
    pub n_k: Vec<u64>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn topics(&self) -> usize {
        self.config.topics
    }

    /// The `n` most probable terms of topic `k`, ties broken lexicographically.
    pub fn top_words(&self, k: usize, n: usize) -> Result<Vec<TopWord>, TopicError> {
        if k >= self.topics() {
            return Err(TopicError::TopicOutOfRange {
                topic: k,
                topics: self.topics(),
            });
        }
        // φ within one topic is monotone in the integer count, so ranking by
        // count gives exact ties.
        let counts = &self.n_kw[k];
        let mut ids: Vec<usize> = (0..self.vocab.len()).collect();
        ids.sort_by(|&a, &b| match counts[b].cmp(&counts[a]) {
            Ordering::Equal => self.vocab.term(a).cmp(self.vocab.term(b)),
            o => o,
        });
        Ok(ids
            .into_iter()
            .take(n)
            .map(|w| TopWord {
                term: self.vocab.term(w).to_string(),
                prob: self.phi[k][w],
            })
            .collect())
    }
}

/// Fit over every term in `docs` (no document-frequency filtering).
pub fn fit_lda<S: AsRef<str>>(docs: &[Vec<S>], cfg: &LdaConfig) -> Result<LdaModel, TopicError> {
    if docs.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    let vocab = build_vocab(docs, 1, 1.0)?;
    fit_lda_with_vocab(docs, vocab, cfg)
}

/// Fit over a fixed vocabulary; out-of-vocabulary tokens are dropped.
pub fn fit_lda_with_vocab<S: AsRef<str>>(
    docs: &[Vec<S>],
    vocab: Vocabulary,
    cfg: &LdaConfig,
) -> Result<LdaModel, TopicError> {
    fit_lda_observed(docs, vocab, cfg, |_| {})
}

/// Like [`fit_lda_with_vocab`], calling `observe` after every sweep.
pub fn fit_lda_observed<S: AsRef<str>>(
    docs: &[Vec<S>],
    vocab: Vocabulary,
    cfg: &LdaConfig,
    mut observe: impl FnMut(&GibbsState),
) -> Result<LdaModel, TopicError> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    if vocab.is_empty() {
        return Err(TopicError::EmptyVocabulary);
    }
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(d)).collect();
    if encoded.iter().all(Vec::is_empty) {
        return Err(TopicError::EmptyCorpus);
    }
    let mut state = GibbsState::init(encoded, vocab.len(), cfg);
    for _ in 0..cfg.iterations {
        state.sweep();
        observe(&state);
    }
    let parts = state.into_parts();
    Ok(LdaModel {
        config: *cfg,
        vocab,
        z: parts.z,
        n_dk: parts.n_dk,
        n_kw: parts.n_kw,
        n_k: parts.n_k,
        theta: parts.theta,
        phi: parts.phi,
    })
}

/// FNV-1a, used to derive stable per-week seeds.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn week_seed(seed: u64, week: WeekKey) -> u64 {
    seed ^ fnv1a(week.to_string().as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedWeek {
    pub week: WeekKey,
    pub reason: String,
}

/// Stemmed documents grouped by ISO week, in corpus order.
pub fn partition_by_week(corpus: &Corpus) -> BTreeMap<WeekKey, Vec<&[String]>> {
    let mut weeks: BTreeMap<WeekKey, Vec<&[String]>> = BTreeMap::new();
    for t in &corpus.tweets {
        weeks.entry(t.week).or_default().push(&t.stemmed_tokens);
    }
    weeks
}

/// Fit one independent model per week. Weeks with fewer documents than
/// topics, or with nothing left after vocabulary filtering, are skipped.
pub fn weekly_models(
    corpus: &Corpus,
    cfg: &LdaConfig,
    vocab_cfg: &VocabConfig,
) -> Result<(BTreeMap<WeekKey, LdaModel>, Vec<SkippedWeek>), TopicError> {
    cfg.validate()?;
    let weeks: Vec<(WeekKey, Vec<&[String]>)> = partition_by_week(corpus).into_iter().collect();
    let results: Vec<(WeekKey, Result<LdaModel, String>)> = weeks
        .into_par_iter()
        .map(|(week, docs)| {
            if docs.len() < cfg.topics {
                let reason = format!("{} documents, fewer than K={}", docs.len(), cfg.topics);
                return (week, Err(reason));
            }
            let docs: Vec<Vec<&str>> = docs
                .iter()
                .map(|d| d.iter().map(String::as_str).collect())
                .collect();
            let week_cfg = LdaConfig {
                seed: week_seed(cfg.seed, week),
                ..*cfg
            };
            let fitted = build_vocab(&docs, vocab_cfg.min_df, vocab_cfg.max_df_ratio)
                .and_then(|vocab| fit_lda_with_vocab(&docs, vocab, &week_cfg))
                .map_err(|e| e.to_string());
            (week, fitted)
        })
        .collect();

    let mut models = BTreeMap::new();
    let mut skipped = Vec::new();
    for (week, fitted) in results {
        match fitted {
            Ok(m) => {
                models.insert(week, m);
            }
            Err(reason) => {
                warn!("skipping topics for {week}: {reason}");
                skipped.push(SkippedWeek { week, reason });
            }
        }
    }
    Ok((models, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyTopics {
    pub weeks: BTreeMap<WeekKey, Vec<Vec<TopWord>>>,
    pub skipped: Vec<SkippedWeek>,
}

/// Per-week top-word lists for every topic.
pub fn weekly_topics(
    corpus: &Corpus,
    cfg: &LdaConfig,
    vocab_cfg: &VocabConfig,
    n_words: usize,
) -> Result<WeeklyTopics, TopicError> {
    let (models, skipped) = weekly_models(corpus, cfg, vocab_cfg)?;
    let weeks = models
        .iter()
        .map(|(week, m)| {
            let topics = (0..m.topics())
                .map(|k| m.top_words(k, n_words))
                .collect::<Result<_, _>>()?;
            Ok((*week, topics))
        })
        .collect::<Result<_, TopicError>>()?;
    Ok(WeeklyTopics { weeks, skipped })
}

/// JSON export of one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExport {
    pub config: LdaConfig,
    pub documents: usize,
    pub vocabulary: Vec<String>,
    pub topics: Vec<Vec<TopWord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<f64>>>,
}

impl ModelExport {
    pub fn from_model(model: &LdaModel, n_words: usize, include_matrices: bool) -> Self {
        let topics = (0..model.topics())
            .map(|k| model.top_words(k, n_words).expect("k < K"))
            .collect();
        Self {
            config: model.config,
            documents: model.theta.len(),
            vocabulary: model.vocab.terms().to_vec(),
            topics,
            theta: include_matrices.then(|| model.theta.clone()),
            phi: include_matrices.then(|| model.phi.clone()),
        }
    }

    /// The first `n` words of every topic.
    pub fn truncated(&self, n: usize) -> Vec<Vec<TopWord>> {
        self.topics
            .iter()
            .map(|t| t.iter().take(n).cloned().collect())
            .collect()
    }
}

/// The `topics.json` artifact: one export per fitted week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsExport {
    pub schema_version: u32,
    pub config: LdaConfig,
    pub vocab: VocabConfig,
    pub weeks: BTreeMap<WeekKey, ModelExport>,
    pub skipped: Vec<SkippedWeek>,
}

impl TopicsExport {
    pub fn build(
        config: LdaConfig,
        vocab: VocabConfig,
        models: &BTreeMap<WeekKey, LdaModel>,
        skipped: Vec<SkippedWeek>,
        include_matrices: bool,
    ) -> Self {
        Self {
            schema_version: 1,
            config,
            vocab,
            weeks: models
                .iter()
                .map(|(w, m)| (*w, ModelExport::from_model(m, EXPORT_TOP_WORDS, include_matrices)))
                .collect(),
            skipped,
        }
    }
}

/// Top words of every topic fitted for one week.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeekTopics {
    pub week: WeekKey,
    pub n_words: usize,
    pub topics: Vec<Vec<TopWord>>,
}

impl TopicsExport {
    pub fn week_topics(&self, week: WeekKey, n_words: usize) -> Option<WeekTopics> {
        self.weeks.get(&week).map(|m| WeekTopics {
            week,
            n_words,
            topics: m.truncated(n_words),
        })
    }
}
