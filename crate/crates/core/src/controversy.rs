//! Controversial phrase tracking.
//!
//! A phrase matches a tweet when its words occur as a contiguous run of
//! surface tokens, or when its words joined without spaces occur as a single
//! token (the hashtag form, `#KungFlu` → `kungflu`).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{tokenize, Corpus, Stopwords};
use crate::period::WeekKey;

/// Longest supported phrase, in words.
pub const MAX_PHRASE_WORDS: usize = 3;

/// Country key for hits without a country code.
pub const UNKNOWN_COUNTRY: &str = "unknown";

#[derive(Debug, Error)]
pub enum ControversyError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    BadTermList { line: usize, reason: String },
    #[error("term list is empty")]
    EmptyTermList,
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Phrase {
    canonical: String,
    words: Vec<String>,
    joined: String,
}

/// Ordered list of canonical phrases with lookup tables for matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermList {
    phrases: Vec<Phrase>,
    by_window: HashMap<String, Vec<usize>>,
    by_joined: HashMap<String, Vec<usize>>,
}

impl TermList {
    /// Build from phrases. Each phrase is normalised through the tweet
    /// tokenizer and must yield one to three words; duplicates are dropped.
    pub fn new<I, S>(phrases: I) -> Result<Self, ControversyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let lines: Vec<String> = phrases.into_iter().map(|s| s.as_ref().to_string()).collect();
        Self::parse(&lines.join("\n"))
    }

    /// One phrase per line; blank lines and `#` comment lines are ignored.
    pub fn parse(text: &str) -> Result<Self, ControversyError> {
        let mut phrases: Vec<Phrase> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words = tokenize(line);
            if words.is_empty() || words.len() > MAX_PHRASE_WORDS {
                return Err(ControversyError::BadTermList {
                    line: idx + 1,
                    reason: format!("{line:?} must contain 1 to {MAX_PHRASE_WORDS} words"),
                });
            }
            let canonical = words.join(" ");
            if phrases.iter().any(|p| p.canonical == canonical) {
                continue;
            }
            phrases.push(Phrase {
                joined: words.concat(),
                canonical,
                words,
            });
        }
        if phrases.is_empty() {
            return Err(ControversyError::EmptyTermList);
        }
        let mut by_window: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_joined: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, p) in phrases.iter().enumerate() {
            by_window.entry(p.canonical.clone()).or_default().push(i);
            by_joined.entry(p.joined.clone()).or_default().push(i);
        }
        Ok(Self {
            phrases,
            by_window,
            by_joined,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ControversyError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ControversyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(crate::BUNDLED_TERMS).expect("bundled term list is valid")
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(|p| p.canonical.as_str())
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.iter().any(|p| p.canonical == phrase)
    }

    /// Words of `phrase` plus its joined form, or `None` if not listed.
    pub fn phrase_tokens(&self, phrase: &str) -> Option<HashSet<&str>> {
        let p = self.phrases.iter().find(|p| p.canonical == phrase)?;
        let mut set: HashSet<&str> = p.words.iter().map(String::as_str).collect();
        set.insert(&p.joined);
        Some(set)
    }
}

/// Canonical phrases present in `tokens`, each at most once, in term-list order.
pub fn match_terms<S: AsRef<str>>(tokens: &[S], terms: &TermList) -> Vec<String> {
    let mut found: BTreeSet<usize> = BTreeSet::new();
    let mut key = String::new();
    for start in 0..tokens.len() {
        if let Some(ids) = terms.by_joined.get(tokens[start].as_ref()) {
            found.extend(ids);
        }
        key.clear();
        for (n, t) in tokens[start..].iter().take(MAX_PHRASE_WORDS).enumerate() {
            if n > 0 {
                key.push(' ');
            }
            key.push_str(t.as_ref());
            if let Some(ids) = terms.by_window.get(&key) {
                found.extend(ids);
            }
        }
    }
    found
        .into_iter()
        .map(|i| terms.phrases[i].canonical.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControversyHit {
    pub tweet_id: String,
    pub term: String,
    pub day: NaiveDate,
    pub week: WeekKey,
    pub country: Option<String>,
}

/// One hit per (tweet, matched phrase), in corpus order.
pub fn scan_corpus(corpus: &Corpus, terms: &TermList) -> Vec<ControversyHit> {
    corpus
        .tweets
        .iter()
        .flat_map(|t| {
            match_terms(&t.surface_tokens, terms)
                .into_iter()
                .map(move |term| ControversyHit {
                    tweet_id: t.id.clone(),
                    term,
                    day: t.day,
                    week: t.week,
                    country: t.country.clone(),
                })
        })
        .collect()
}

/// Hit counts per country. Fractions are over hits with a known country;
/// unknown-country hits appear only in `counts` under [`UNKNOWN_COUNTRY`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountryBreakdown {
    pub counts: BTreeMap<String, u64>,
    pub fractions: BTreeMap<String, f64>,
}

impl CountryBreakdown {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn fraction(&self, country: &str) -> Option<f64> {
        self.fractions.get(country).copied()
    }
}

pub fn country_breakdown<'a>(hits: impl IntoIterator<Item = &'a ControversyHit>) -> CountryBreakdown {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for h in hits {
        let key = h.country.as_deref().unwrap_or(UNKNOWN_COUNTRY);
        *counts.entry(key.to_string()).or_default() += 1;
    }
    let known: u64 = counts
        .iter()
        .filter(|(k, _)| *k != UNKNOWN_COUNTRY)
        .map(|(_, v)| v)
        .sum();
    let fractions = counts
        .iter()
        .filter(|(k, _)| *k != UNKNOWN_COUNTRY)
        .map(|(k, &v)| (k.clone(), v as f64 / known as f64))
        .collect();
    CountryBreakdown { counts, fractions }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurringToken {
    pub token: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceTable {
    pub term: String,
    pub total_hits: u64,
    /// Descending by count, ties lexicographic.
    pub counts: Vec<CooccurringToken>,
}

impl CooccurrenceTable {
    pub fn truncated(&self, top_n: usize) -> Self {
        Self {
            term: self.term.clone(),
            total_hits: self.total_hits,
            counts: self.counts.iter().take(top_n).cloned().collect(),
        }
    }
}

/// Tokens co-occurring with `term` across its hit tweets, counted once per
/// tweet. Stopwords and the phrase's own words (and joined form) are excluded.
pub fn cooccurrence(
    corpus: &Corpus,
    hits: &[ControversyHit],
    terms: &TermList,
    term: &str,
    stopwords: &Stopwords,
    top_n: usize,
) -> Result<CooccurrenceTable, ControversyError> {
    let own = terms
        .phrase_tokens(term)
        .ok_or_else(|| ControversyError::UnknownTerm(term.to_string()))?;
    let by_id: HashMap<&str, &[String]> = corpus
        .tweets
        .iter()
        .map(|t| (t.id.as_str(), t.surface_tokens.as_slice()))
        .collect();
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut total_hits = 0;
    for hit in hits.iter().filter(|h| h.term == term) {
        total_hits += 1;
        let Some(tokens) = by_id.get(hit.tweet_id.as_str()) else {
            continue;
        };
        let distinct: HashSet<&str> = tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !own.contains(t) && !stopwords.contains(t))
            .collect();
        for t in distinct {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<CooccurringToken> = counts
        .into_iter()
        .map(|(token, count)| CooccurringToken {
            token: token.to_string(),
            count,
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    ranked.truncate(top_n);
    Ok(CooccurrenceTable {
        term: term.to_string(),
        total_hits,
        counts: ranked,
    })
}

/// Per-term summary served by the term list endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub term: String,
    pub total_hits: u64,
    pub countries: CountryBreakdown,
}

/// The `controversy.json` artifact. Co-occurrence tables are stored untruncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControversyExport {
    pub schema_version: u32,
    pub total_hits: u64,
    pub countries: CountryBreakdown,
    pub terms: Vec<TermSummary>,
    pub cooccurrence: BTreeMap<String, CooccurrenceTable>,
}

impl ControversyExport {
    pub fn build(corpus: &Corpus, terms: &TermList, stopwords: &Stopwords) -> Self {
        let hits = scan_corpus(corpus, terms);
        let summaries = terms
            .phrases()
            .map(|p| {
                let mine: Vec<&ControversyHit> = hits.iter().filter(|h| h.term == p).collect();
                TermSummary {
                    term: p.to_string(),
                    total_hits: mine.len() as u64,
                    countries: country_breakdown(mine),
                }
            })
            .collect();
        let cooccurrence = terms
            .phrases()
            .map(|p| {
                let table = cooccurrence(corpus, &hits, terms, p, stopwords, usize::MAX)
                    .expect("phrase comes from the term list");
                (p.to_string(), table)
            })
            .collect();
        Self {
            schema_version: 1,
            total_hits: hits.len() as u64,
            countries: country_breakdown(&hits),
            terms: summaries,
            cooccurrence,
        }
    }
}

/// The term list view: overall and per-term hit counts with country breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermsView<'a> {
    pub total_hits: u64,
    pub countries: &'a CountryBreakdown,
    pub terms: &'a [TermSummary],
}

impl ControversyExport {
    pub fn terms_view(&self) -> TermsView<'_> {
        TermsView {
            total_hits: self.total_hits,
            countries: &self.countries,
            terms: &self.terms,
        }
    }

    /// The stored table for `term`, cut to `top_n` tokens. `term` is matched
    /// after the same normalization the term list applies.
    pub fn cooccurrence_table(&self, term: &str, top_n: usize) -> Result<CooccurrenceTable, ControversyError> {
        let key = tokenize(term).join(" ");
        self.cooccurrence
            .get(&key)
            .map(|t| t.truncated(top_n))
            .ok_or_else(|| ControversyError::UnknownTerm(term.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProcessedTweet;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn terms() -> TermList {
        TermList::bundled()
    }

    #[test]
    fn contiguous_match() {
        assert_eq!(match_terms(&toks("the chinese virus is"), &terms()), ["chinese virus"]);
    }

    #[test]
    fn joined_variant_match() {
        assert_eq!(match_terms(&toks("wuhanvirus"), &terms()), ["wuhan virus"]);
    }

    #[test]
    fn order_matters() {
        assert!(match_terms(&toks("virus chinese"), &terms()).is_empty());
    }

    #[test]
    fn reported_once_in_list_order() {
        let got = match_terms(&toks("kung flu and chinese virus and kungflu"), &terms());
        assert_eq!(got, ["chinese virus", "kung flu"]);
    }

    #[test]
    fn term_list_file_format() {
        let t = TermList::parse("# comment\n\nWuhan Virus\n  kung flu  \nkung flu\n").unwrap();
        assert_eq!(t.phrases().collect::<Vec<_>>(), ["wuhan virus", "kung flu"]);
        assert!(matches!(
            TermList::parse("a b c d"),
            Err(ControversyError::BadTermList { line: 1, .. })
        ));
        assert!(matches!(TermList::parse("# only comments\n"), Err(ControversyError::EmptyTermList)));
    }

    fn tweet(id: &str, text: &str, country: Option<&str>) -> ProcessedTweet {
        let day = NaiveDate::from_ymd_opt(2020, 3, 12).unwrap();
        ProcessedTweet {
            id: id.into(),
            day,
            week: WeekKey::of(day),
            country: country.map(String::from),
            surface_tokens: tokenize(text),
            stemmed_tokens: vec![],
        }
    }

    #[test]
    fn scan_dedups_and_splits() {
        let corpus = Corpus::from_tweets(vec![
            tweet("1", "nothing to see", None),
            tweet("2", "chinese virus and kung flu", Some("US")),
            tweet("3", "chinese virus chinese virus", None),
        ]);
        let hits = scan_corpus(&corpus, &terms());
        assert_eq!(hits.len(), 3);
        assert_eq!(hits.iter().filter(|h| h.tweet_id == "2").count(), 2);
        assert_eq!(hits.iter().filter(|h| h.tweet_id == "3").count(), 1);
        assert!(scan_corpus(&Corpus::from_tweets(vec![tweet("1", "hi", None)]), &terms()).is_empty());
    }

    fn hit(country: Option<&str>) -> ControversyHit {
        let day = NaiveDate::from_ymd_opt(2020, 3, 12).unwrap();
        ControversyHit {
            tweet_id: "x".into(),
            term: "kung flu".into(),
            day,
            week: WeekKey::of(day),
            country: country.map(String::from),
        }
    }

    #[test]
    fn breakdown_fractions() {
        let hits = [hit(Some("US")), hit(Some("US")), hit(Some("GB"))];
        let b = country_breakdown(&hits);
        assert_eq!(b.counts["US"], 2);
        assert_eq!(b.counts["GB"], 1);
        assert_eq!(b.fraction("US"), Some(2.0 / 3.0));
        assert_eq!(b.fraction("GB"), Some(1.0 / 3.0));

        let b = country_breakdown(&[hit(None), hit(None)]);
        assert_eq!(b.counts.keys().collect::<Vec<_>>(), [UNKNOWN_COUNTRY]);
        assert!(b.fractions.is_empty());

        assert_eq!(country_breakdown(&[]), CountryBreakdown::default());
    }

    #[test]
    fn cooccurrence_counts_and_exclusions() {
        let corpus = Corpus::from_tweets(vec![
            tweet("1", "the chinese virus is racist #ChinaMustExplain", Some("US")),
            tweet("2", "#ChineseVirus racist racist", Some("US")),
            tweet("3", "racist but no phrase", None),
        ]);
        let t = terms();
        let hits = scan_corpus(&corpus, &t);
        let sw = Stopwords::bundled();
        let table = cooccurrence(&corpus, &hits, &t, "chinese virus", &sw, 10).unwrap();
        assert_eq!(table.total_hits, 2);
        let get = |k: &str| table.counts.iter().find(|c| c.token == k).map(|c| c.count);
        assert_eq!(get("racist"), Some(2));
        assert_eq!(get("chinamustexplain"), Some(1));
        assert_eq!(get("virus"), None);
        assert_eq!(get("chinesevirus"), None);
        assert_eq!(get("the"), None);
        assert!(table.counts.iter().all(|c| c.count <= table.total_hits));

        assert!(matches!(
            cooccurrence(&corpus, &hits, &t, "unlisted", &sw, 10),
            Err(ControversyError::UnknownTerm(_))
        ));
    }

    #[test]
    fn cooccurrence_tie_break() {
        let corpus = Corpus::from_tweets(vec![
            tweet("1", "kung flu b a", None),
            tweet("2", "kung flu a b", None),
            tweet("3", "kung flu b a", None),
        ]);
        let t = terms();
        let hits = scan_corpus(&corpus, &t);
        let table = cooccurrence(&corpus, &hits, &t, "kung flu", &Stopwords::default(), 1).unwrap();
        assert_eq!(table.counts, [CooccurringToken { token: "a".into(), count: 3 }]);
    }

    /// Check every window of width 1..=3 against the phrase set.
    fn brute_force(tokens: &[String], phrases: &[&str]) -> Vec<String> {
        let mut out = Vec::new();
        for p in phrases {
            let words: Vec<&str> = p.split(' ').collect();
            let joined = words.concat();
            let mut hit = false;
            for width in 1..=3 {
                for w in tokens.windows(width) {
                    if w.len() == words.len() && w.iter().zip(&words).all(|(a, b)| a == b) {
                        hit = true;
                    }
                    if width == 1 && w[0] == joined {
                        hit = true;
                    }
                }
            }
            if hit {
                out.push(p.to_string());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn matches_brute_force(tokens in prop::collection::vec(
            prop::sample::select(vec!["wuhan", "virus", "chinese", "kung", "flu", "kungflu",
                "wuhanvirus", "the", "racist", "chinesevirus"]), 0..12)
        ) {
            let tokens: Vec<String> = tokens.into_iter().map(String::from).collect();
            let phrases = ["wuhan virus", "chinese virus", "kung flu"];
            prop_assert_eq!(match_terms(&tokens, &terms()), brute_force(&tokens, &phrases));
        }

        #[test]
        fn breakdown_conserves_hits(countries in prop::collection::vec(
            prop::option::of(prop::sample::select(vec!["US", "GB", "SG"])), 0..40)
        ) {
            let hits: Vec<_> = countries.iter().map(|c| hit(*c)).collect();
            let b = country_breakdown(&hits);
            prop_assert_eq!(b.total(), hits.len() as u64);
            if !b.fractions.is_empty() {
                let s: f64 = b.fractions.values().sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn cooccurrence_is_monotone(extra in prop::collection::vec(
            prop::sample::select(vec!["racist", "blame", "the", "china", "virus"]), 0..6)
        ) {
            let base = vec![
                tweet("1", "kung flu racist blame", None),
                tweet("2", "kungflu china", None),
            ];
            let mut grown = base.clone();
            grown.push(tweet("3", &format!("kung flu {}", extra.join(" ")), None));
            let t = terms();
            let sw = Stopwords::bundled();
            let small = Corpus::from_tweets(base);
            let big = Corpus::from_tweets(grown);
            let a = cooccurrence(&small, &scan_corpus(&small, &t), &t, "kung flu", &sw, 100).unwrap();
            let b = cooccurrence(&big, &scan_corpus(&big, &t), &t, "kung flu", &sw, 100).unwrap();
            for c in &a.counts {
                let after = b.counts.iter().find(|x| x.token == c.token).map_or(0, |x| x.count);
                prop_assert!(after >= c.count);
            }
        }
    }
}
