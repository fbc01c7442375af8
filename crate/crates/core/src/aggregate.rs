//! Time-and-country rollups of per-tweet scores.
//!
//! Every tweet lands in four buckets: its day and its ISO week, each for the
//! all-countries rollup (`country: None`) and, when known, for its country.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use rayon::prelude::*;

use crate::affect::{score_emotions, score_sentiment, EmotionVector, SentimentScore};
use crate::ingest::Corpus;
use crate::lexicon::{Emotion, EmotionLexicon, SentimentLexicon};
use crate::period::{Granularity, Period, PeriodError};

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

/// Upper bound on the number of points a single query may return.
pub const MAX_SERIES_POINTS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("scores do not match corpus: {0}")]
    ScoreCorpusMismatch(String),
    #[error("invalid range: {from} is after {to}")]
    InvalidRange { from: String, to: String },
    #[error("range of {0} periods exceeds the limit of {MAX_SERIES_POINTS}")]
    RangeTooLarge(u64),
    #[error(transparent)]
    InvalidPeriod(#[from] PeriodError),
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BucketKey {
    pub granularity: Granularity,
    pub period: String,
    /// `None` is the all-countries rollup.
    pub country: Option<String>,
}

impl BucketKey {
    pub fn new(period: Period, country: Option<&str>) -> Self {
        Self {
            granularity: period.granularity(),
            period: period.to_string(),
            country: country.map(String::from),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentBucket {
    /// Mean of the per-tweet mean scores.
    pub mean: f64,
    pub positivity: f64,
    pub negativity: f64,
    pub count: u64,
}

/// Mean normalized emotion components, one field per emotion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmotionMeans {
    pub anger: f64,
    pub fear: f64,
    pub sadness: f64,
    pub disgust: f64,
    pub surprise: f64,
    pub anticipation: f64,
    pub trust: f64,
    pub joy: f64,
}

impl EmotionMeans {
    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            anger: v[0],
            fear: v[1],
            sadness: v[2],
            disgust: v[3],
            surprise: v[4],
            anticipation: v[5],
            trust: v[6],
            joy: v[7],
        }
    }

    pub fn to_array(self) -> [f64; 8] {
        [
            self.anger,
            self.fear,
            self.sadness,
            self.disgust,
            self.surprise,
            self.anticipation,
            self.trust,
            self.joy,
        ]
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.to_array()[e.index()]
    }
}

/// Scores for one corpus tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetScore {
    pub id: String,
    pub sentiment: SentimentScore,
    pub emotions: EmotionVector,
}

/// Maps keyed by [`BucketKey`] serialize as a list of `{key, value}` records.
mod bucket_map {
    use super::BucketKey;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry<V> {
        key: BucketKey,
        value: V,
    }

    pub fn serialize<V: Serialize + Clone, S: Serializer>(
        map: &BTreeMap<BucketKey, V>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(k, v)| Entry {
            key: k.clone(),
            value: v.clone(),
        }))
    }

    pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<BucketKey, V>, D::Error> {
        let entries: Vec<Entry<V>> = Vec::deserialize(d)?;
        let n = entries.len();
        let map: BTreeMap<_, _> = entries.into_iter().map(|e| (e.key, e.value)).collect();
        if map.len() != n {
            return Err(serde::de::Error::custom("duplicate bucket key"));
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSnapshot {
    pub corpus_id: String,
    pub built_at: DateTime<Utc>,
    #[serde(with = "bucket_map")]
    pub volume: BTreeMap<BucketKey, u64>,
    #[serde(with = "bucket_map")]
    pub sentiment: BTreeMap<BucketKey, SentimentBucket>,
    #[serde(with = "bucket_map")]
    pub emotions: BTreeMap<BucketKey, EmotionMeans>,
}

impl Default for AggregateSnapshot {
    fn default() -> Self {
        Self {
            corpus_id: String::new(),
            built_at: DateTime::<Utc>::UNIX_EPOCH,
            volume: BTreeMap::new(),
            sentiment: BTreeMap::new(),
            emotions: BTreeMap::new(),
        }
    }
}

/// Score every tweet's surface tokens, in corpus order.
pub fn score_corpus(corpus: &Corpus, afinn: &SentimentLexicon, nrc: &EmotionLexicon) -> Vec<TweetScore> {
    corpus
        .tweets
        .par_iter()
        .map(|t| TweetScore {
            id: t.id.clone(),
            sentiment: score_sentiment(&t.surface_tokens, afinn),
            emotions: score_emotions(&t.surface_tokens, nrc),
        })
        .collect()
}

#[derive(Default)]
struct Accumulator {
    count: u64,
    mean: f64,
    positivity: f64,
    negativity: f64,
    emotions: [f64; 8],
}

pub fn build_snapshot(corpus: &Corpus, scores: &[TweetScore]) -> Result<AggregateSnapshot, AggregateError> {
    let now = DateTime::from_timestamp(Utc::now().timestamp(), 0).expect("current time is valid");
    build_snapshot_at(corpus, scores, now)
}

pub fn build_snapshot_at(
    corpus: &Corpus,
    scores: &[TweetScore],
    built_at: DateTime<Utc>,
) -> Result<AggregateSnapshot, AggregateError> {
    if scores.len() != corpus.len() {
        return Err(AggregateError::ScoreCorpusMismatch(format!(
            "{} scores for {} tweets",
            scores.len(),
            corpus.len()
        )));
    }
    let mut acc: BTreeMap<BucketKey, Accumulator> = BTreeMap::new();
    for (tweet, score) in corpus.tweets.iter().zip(scores) {
        if tweet.id != score.id {
            return Err(AggregateError::ScoreCorpusMismatch(format!(
                "score for {:?} where tweet {:?} was expected",
                score.id, tweet.id
            )));
        }
        for granularity in [Granularity::Day, Granularity::Week] {
            let period = Period::of(granularity, tweet.day);
            let countries = [None, tweet.country.as_deref()];
            for country in countries.iter().take(if tweet.country.is_some() { 2 } else { 1 }) {
                let a = acc.entry(BucketKey::new(period, *country)).or_default();
                a.count += 1;
                a.mean += score.sentiment.mean;
                a.positivity += score.sentiment.positivity as f64;
                a.negativity += score.sentiment.negativity as f64;
                for (sum, v) in a.emotions.iter_mut().zip(score.emotions.normalized) {
                    *sum += v;
                }
            }
        }
    }

    let mut snapshot = AggregateSnapshot {
        corpus_id: corpus.content_hash(),
        built_at,
        ..Default::default()
    };
    for (key, a) in acc {
        let n = a.count as f64;
        snapshot.volume.insert(key.clone(), a.count);
        snapshot.sentiment.insert(
            key.clone(),
            SentimentBucket {
                mean: a.mean / n,
                positivity: a.positivity / n,
                negativity: a.negativity / n,
                count: a.count,
            },
        );
        snapshot
            .emotions
            .insert(key, EmotionMeans::from_array(a.emotions.map(|s| s / n)));
    }
    Ok(snapshot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Volume,
    Sentiment,
    Emotions,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Volume => "volume",
            Metric::Sentiment => "sentiment",
            Metric::Emotions => "emotions",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "volume" => Ok(Metric::Volume),
            "sentiment" => Ok(Metric::Sentiment),
            "emotions" => Ok(Metric::Emotions),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumePoint {
    pub period: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentPoint {
    pub period: String,
    pub count: u64,
    pub mean: Option<f64>,
    pub positivity: Option<f64>,
    pub negativity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionPoint {
    pub period: String,
    pub count: u64,
    pub emotions: Option<EmotionMeans>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SeriesPoint {
    Volume(VolumePoint),
    Sentiment(SentimentPoint),
    Emotions(EmotionPoint),
}

impl SeriesPoint {
    pub fn period(&self) -> &str {
        match self {
            SeriesPoint::Volume(p) => &p.period,
            SeriesPoint::Sentiment(p) => &p.period,
            SeriesPoint::Emotions(p) => &p.period,
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            SeriesPoint::Volume(p) => p.count,
            SeriesPoint::Sentiment(p) => p.count,
            SeriesPoint::Emotions(p) => p.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub metric: Metric,
    pub granularity: Granularity,
    pub country: Option<String>,
    pub from: String,
    pub to: String,
    pub points: Vec<SeriesPoint>,
}

/// Contiguous, ascending series over `from..=to`. Periods without data have
/// count 0 and null measurements.
pub fn query(
    snapshot: &AggregateSnapshot,
    metric: Metric,
    granularity: Granularity,
    from: &str,
    to: &str,
    country: Option<&str>,
) -> Result<Series, AggregateError> {
    let start = Period::parse(granularity, from)?;
    let end = Period::parse(granularity, to)?;
    let span = Period::span(start, end).ok_or_else(|| AggregateError::InvalidRange {
        from: from.to_string(),
        to: to.to_string(),
    })?;
    if span > MAX_SERIES_POINTS {
        return Err(AggregateError::RangeTooLarge(span));
    }

    let mut points = Vec::with_capacity(span as usize);
    let mut current = Some(start);
    while let Some(p) = current.filter(|p| *p <= end) {
        let key = BucketKey::new(p, country);
        let count = snapshot.volume.get(&key).copied().unwrap_or(0);
        let period = p.to_string();
        points.push(match metric {
            Metric::Volume => SeriesPoint::Volume(VolumePoint { period, count }),
            Metric::Sentiment => {
                let s = snapshot.sentiment.get(&key);
                SeriesPoint::Sentiment(SentimentPoint {
                    period,
                    count,
                    mean: s.map(|s| s.mean),
                    positivity: s.map(|s| s.positivity),
                    negativity: s.map(|s| s.negativity),
                })
            }
            Metric::Emotions => SeriesPoint::Emotions(EmotionPoint {
                period,
                count,
                emotions: snapshot.emotions.get(&key).copied(),
            }),
        });
        current = p.succ();
    }
    Ok(Series {
        metric,
        granularity,
        country: country.map(String::from),
        from: start.to_string(),
        to: end.to_string(),
        points,
    })
}

/// Summary of what a snapshot covers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotMeta {
    pub corpus_id: String,
    pub built_at: DateTime<Utc>,
    pub first_day: Option<String>,
    pub last_day: Option<String>,
    pub countries: Vec<String>,
    pub weeks: Vec<String>,
    pub tweets: u64,
}

impl AggregateSnapshot {
    pub fn meta(&self) -> SnapshotMeta {
        let mut days = BTreeSet::new();
        let mut weeks = BTreeSet::new();
        let mut countries = BTreeSet::new();
        let mut tweets = 0;
        for (k, v) in &self.volume {
            if let Some(c) = &k.country {
                countries.insert(c.clone());
            }
            match (k.granularity, &k.country) {
                (Granularity::Day, None) => {
                    days.insert(k.period.clone());
                    tweets += v;
                }
                (Granularity::Day, Some(_)) => {}
                (Granularity::Week, _) => {
                    weeks.insert(k.period.clone());
                }
            }
        }
        SnapshotMeta {
            corpus_id: self.corpus_id.clone(),
            built_at: self.built_at,
            first_day: days.first().cloned(),
            last_day: days.last().cloned(),
            countries: countries.into_iter().collect(),
            weeks: weeks.into_iter().collect(),
            tweets,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    schema_version: u32,
    snapshot: AggregateSnapshot,
    checksum: String,
}

fn checksum(snapshot: &AggregateSnapshot) -> String {
    let body = serde_json::to_vec(snapshot).expect("snapshot always serializes");
    format!("sha256:{}", hex::encode(Sha256::digest(&body)))
}

/// Serialize with the schema version and a trailing checksum of the body.
pub fn encode(snapshot: &AggregateSnapshot) -> Vec<u8> {
    let file = SnapshotFile {
        schema_version: SNAPSHOT_SCHEMA_VERSION,
        snapshot: snapshot.clone(),
        checksum: checksum(snapshot),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("snapshot always serializes");
    out.push(b'\n');
    out
}

pub fn decode(bytes: &[u8]) -> Result<AggregateSnapshot, AggregateError> {
    let file: SnapshotFile =
        serde_json::from_slice(bytes).map_err(|e| AggregateError::CorruptSnapshot(e.to_string()))?;
    if file.schema_version != SNAPSHOT_SCHEMA_VERSION {
        return Err(AggregateError::CorruptSnapshot(format!(
            "unsupported schema_version {}",
            file.schema_version
        )));
    }
    if checksum(&file.snapshot) != file.checksum {
        return Err(AggregateError::CorruptSnapshot("checksum mismatch".into()));
    }
    Ok(file.snapshot)
}

/// Write the snapshot atomically (temp file + rename) and return its path.
pub fn persist(snapshot: &AggregateSnapshot, path: impl AsRef<Path>) -> Result<PathBuf, AggregateError> {
    let path = path.as_ref();
    let io_err = |source| AggregateError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("json.tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(&encode(snapshot)).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(path.to_path_buf())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<AggregateSnapshot, AggregateError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| AggregateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProcessedTweet;
    use crate::period::WeekKey;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn tweet(id: usize, day: NaiveDate, country: Option<&str>) -> ProcessedTweet {
        ProcessedTweet {
            id: id.to_string(),
            day,
            week: WeekKey::of(day),
            country: country.map(String::from),
            surface_tokens: vec![],
            stemmed_tokens: vec![],
        }
    }

    fn score(id: usize, mean: f64) -> TweetScore {
        TweetScore {
            id: id.to_string(),
            sentiment: SentimentScore {
                sum: mean as i64,
                mean,
                positivity: mean.max(0.0) as u64,
                negativity: (-mean).max(0.0) as u64,
                matched: u64::from(mean != 0.0),
            },
            emotions: EmotionVector::default(),
        }
    }

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, d).unwrap()
    }

    fn epoch() -> DateTime<Utc> {
        DateTime::<Utc>::UNIX_EPOCH
    }

    #[test]
    fn weekly_mean_of_means() {
        let corpus = Corpus::from_tweets(vec![tweet(0, day(9), None), tweet(1, day(10), None), tweet(2, day(12), None)]);
        let scores = [score(0, 1.0), score(1, 2.0), score(2, 3.0)];
        let snap = build_snapshot_at(&corpus, &scores, epoch()).unwrap();
        let key = BucketKey::new(Period::parse(Granularity::Week, "2020-W11").unwrap(), None);
        assert_eq!(snap.volume[&key], 3);
        assert_eq!(snap.sentiment[&key].mean, 2.0);
    }

    #[test]
    fn daily_volume_partitions_corpus() {
        let corpus = Corpus::from_tweets(vec![
            tweet(0, day(9), Some("US")),
            tweet(1, day(9), None),
            tweet(2, day(10), Some("GB")),
            tweet(3, day(10), Some("US")),
            tweet(4, day(10), None),
        ]);
        let scores: Vec<_> = (0..5).map(|i| score(i, 0.0)).collect();
        let snap = build_snapshot_at(&corpus, &scores, epoch()).unwrap();
        let daily: u64 = snap
            .volume
            .iter()
            .filter(|(k, _)| k.granularity == Granularity::Day && k.country.is_none())
            .map(|(_, v)| v)
            .sum();
        assert_eq!(daily, 5);
        let key = BucketKey::new(Period::Day(day(9)), None);
        assert_eq!(snap.sentiment[&key].mean, 0.0);
        assert_eq!(snap.volume[&key], 2);
        assert_eq!(snap.meta().countries, ["GB", "US"]);
    }

    #[test]
    fn mismatched_scores() {
        let corpus = Corpus::from_tweets(vec![tweet(0, day(9), None)]);
        assert!(matches!(
            build_snapshot_at(&corpus, &[], epoch()),
            Err(AggregateError::ScoreCorpusMismatch(_))
        ));
        assert!(matches!(
            build_snapshot_at(&corpus, &[score(7, 0.0)], epoch()),
            Err(AggregateError::ScoreCorpusMismatch(_))
        ));
    }

    fn sample_snapshot() -> AggregateSnapshot {
        let corpus = Corpus::from_tweets(vec![
            tweet(0, day(2), Some("US")),
            tweet(1, day(3), None),
            tweet(2, day(17), Some("SG")),
        ]);
        let scores = [score(0, 1.5), score(1, -2.0), score(2, 0.0)];
        build_snapshot_at(&corpus, &scores, epoch()).unwrap()
    }

    #[test]
    fn query_fills_gaps() {
        let snap = sample_snapshot();
        let s = query(&snap, Metric::Volume, Granularity::Week, "2020-W10", "2020-W12", None).unwrap();
        let counts: Vec<u64> = s.points.iter().map(SeriesPoint::count).collect();
        assert_eq!(counts, [2, 0, 1]);
        let periods: Vec<&str> = s.points.iter().map(SeriesPoint::period).collect();
        assert_eq!(periods, ["2020-W10", "2020-W11", "2020-W12"]);

        let s = query(&snap, Metric::Sentiment, Granularity::Week, "2020-W10", "2020-W12", None).unwrap();
        match &s.points[1] {
            SeriesPoint::Sentiment(p) => assert_eq!((p.count, p.mean), (0, None)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn query_unknown_country_is_all_empty() {
        let snap = sample_snapshot();
        let s = query(&snap, Metric::Emotions, Granularity::Day, "2020-03-01", "2020-03-05", Some("FR")).unwrap();
        assert_eq!(s.points.len(), 5);
        assert!(s.points.iter().all(|p| matches!(p, SeriesPoint::Emotions(e) if e.count == 0 && e.emotions.is_none())));
    }

    #[test]
    fn query_errors() {
        let snap = sample_snapshot();
        assert!(matches!(
            query(&snap, Metric::Sentiment, Granularity::Week, "2020-W12", "2020-W10", None),
            Err(AggregateError::InvalidRange { .. })
        ));
        assert!(matches!(
            query(&snap, Metric::Volume, Granularity::Week, "2020-03-01", "2020-W10", None),
            Err(AggregateError::InvalidPeriod(_))
        ));
        assert!(matches!(
            query(&snap, Metric::Volume, Granularity::Day, "1900-01-01", "2100-01-01", None),
            Err(AggregateError::RangeTooLarge(_))
        ));
    }

    #[test]
    fn persist_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let snap = sample_snapshot();
        let path = persist(&snap, dir.path().join("snapshot.json")).unwrap();
        assert_eq!(load_snapshot(&path).unwrap(), snap);

        let empty = AggregateSnapshot::default();
        let path = persist(&empty, dir.path().join("empty.json")).unwrap();
        assert_eq!(load_snapshot(&path).unwrap(), empty);
    }

    #[test]
    fn truncated_or_tampered_is_corrupt() {
        let bytes = encode(&sample_snapshot());
        assert!(matches!(decode(&bytes[..bytes.len() / 2]), Err(AggregateError::CorruptSnapshot(_))));
        let text = String::from_utf8(bytes).unwrap().replacen("\"count\": 1", "\"count\": 9", 1);
        assert!(matches!(decode(text.as_bytes()), Err(AggregateError::CorruptSnapshot(_))));
        let v2 = String::from_utf8(encode(&sample_snapshot())).unwrap().replacen(
            "\"schema_version\": 1",
            "\"schema_version\": 2",
            1,
        );
        assert!(matches!(decode(v2.as_bytes()), Err(AggregateError::CorruptSnapshot(_))));
    }

    proptest! {
        #[test]
        fn volume_conservation(rows in prop::collection::vec(
            (1u32..=31, prop::option::of(prop::sample::select(vec!["US", "GB", "IN"])), -5i32..=5), 0..60)
        ) {
            let tweets: Vec<_> = rows.iter().enumerate().map(|(i, (d, c, _))| tweet(i, day(*d), *c)).collect();
            let scores: Vec<_> = rows.iter().enumerate().map(|(i, (_, _, m))| score(i, f64::from(*m))).collect();
            let corpus = Corpus::from_tweets(tweets);
            let snap = build_snapshot_at(&corpus, &scores, epoch()).unwrap();
            let sum = |g: Granularity| -> u64 {
                snap.volume.iter().filter(|(k, _)| k.granularity == g && k.country.is_none()).map(|(_, v)| v).sum()
            };
            prop_assert_eq!(sum(Granularity::Day), rows.len() as u64);
            prop_assert_eq!(sum(Granularity::Week), rows.len() as u64);
            for (k, v) in &snap.volume {
                prop_assert!(snap.sentiment.contains_key(k) && snap.emotions.contains_key(k));
                if k.country.is_some() {
                    let all = BucketKey { country: None, ..k.clone() };
                    prop_assert!(*v <= snap.volume[&all]);
                }
            }
            prop_assert_eq!(decode(&encode(&snap)).unwrap(), snap.clone());
            let q1 = query(&snap, Metric::Sentiment, Granularity::Day, "2020-03-01", "2020-03-31", None).unwrap();
            let q2 = query(&snap, Metric::Sentiment, Granularity::Day, "2020-03-01", "2020-03-31", None).unwrap();
            prop_assert_eq!(q1.points.len(), 31);
            prop_assert_eq!(q1, q2);
        }
    }
}
