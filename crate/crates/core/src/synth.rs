//! Seeded generator for synthetic tweet corpora with planted structure.
//!
//! The generated corpus has three planted signals:
//! - the third week carries a higher share of negative words;
//! - a fixed fraction of tweets mention a controversial phrase, 60% of them
//!   tagged `US`;
//! - the fourth and fifth weeks each contain a themed cluster of tweets built
//!   from a small dedicated vocabulary.

use std::ops::RangeInclusive;

use chrono::{DateTime, Duration, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::RawTweet;
use crate::period::WeekKey;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub tweets: usize,
    /// At least 5.
    pub weeks: u32,
    pub first_week: WeekKey,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            tweets: 2000,
            weeks: 6,
            first_week: WeekKey::new(2020, 8).expect("valid week"),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Theme {
    pub week: WeekKey,
    /// Surface form of the word every themed tweet contains.
    pub signature: &'static str,
    pub words: &'static [&'static str],
}

/// What was planted, for checking results against.
#[derive(Debug, Clone)]
pub struct Plan {
    pub weeks: Vec<WeekKey>,
    pub negative_week: WeekKey,
    pub themes: Vec<Theme>,
    pub controversy_tweets: usize,
    pub us_controversy_tweets: usize,
}

const BACKGROUND: &[&str] = &[
    "lockdown", "quarantine", "vaccine", "mask", "masks", "hospital", "cases", "testing", "school",
    "schools", "work", "home", "government", "economy", "stock", "market", "travel", "flight",
    "closures", "news", "italy", "outbreak", "pandemic", "doctors", "nurses", "distancing",
    "symptoms", "cough", "fever", "family", "stay", "coronavirus", "covid", "covid-19", "spread",
    "spreading", "city", "update", "minister", "press", "briefing", "week", "today", "people",
    "online", "sanitizer", "hands", "wash", "events", "concert", "football", "season", "office",
    "remote", "students", "exams", "border", "cruise", "ship", "deaths",
];

const POSITIVE: &[&str] = &[
    "good", "happy", "hope", "love", "thank", "great", "safe", "support", "grateful", "kind",
    "strong", "brave",
];

const NEGATIVE: &[&str] = &[
    "bad", "fear", "sad", "panic", "worried", "crisis", "terrible", "scared", "awful", "chaos",
    "angry", "horrible",
];

const STOP: &[&str] = &["the", "is", "we", "to", "and", "of", "in", "this", "are", "for", "it", "all"];

const BALTIMORE: &[&str] = &[
    "police", "downtown", "sirens", "maryland", "officers", "street", "corner", "night",
];

const TOILET: &[&str] = &[
    "hoarding", "supermarket", "shelves", "rolls", "aisle", "costco", "stockpile", "trolley",
];

const CONTROVERSY: &[&str] = &[
    "wuhan virus", "chinese virus", "kung flu", "#wuhanvirus", "#chinesevirus", "#kungflu",
];

const CONTROVERSY_CONTEXT: &[&str] = &[
    "racist", "chinaliedpeopledied", "chinamustexplain", "blame", "origin", "media",
];

const FOREIGN: &[(&str, &str)] = &[
    ("fr", "le virus est partout dans la ville et les gens ont peur"),
    ("fr", "restez chez vous pour sauver des vies"),
    ("es", "el virus se propaga en la ciudad y la gente tiene miedo"),
    ("es", "quedate en casa por favor"),
];

const COUNTRIES: &[(Option<&str>, u32)] = &[
    (Some("US"), 30),
    (Some("GB"), 15),
    (Some("IN"), 10),
    (Some("CA"), 5),
    (Some("AU"), 5),
    (None, 35),
];

const OTHER_CONTROVERSY_COUNTRIES: &[Option<&str>] = &[Some("GB"), Some("IN"), Some("AU"), None];

/// Share of negative sentiment words outside and inside the negative week.
const NEG_SHARE: f64 = 0.4;
const NEG_SHARE_PLANTED: f64 = 0.75;
/// Share of tweets in a theme week that belong to the theme.
const THEME_SHARE: f64 = 0.25;

fn weeks_of(cfg: &SynthConfig) -> Vec<WeekKey> {
    assert!(cfg.weeks >= 5, "synthetic corpus needs at least 5 weeks");
    std::iter::successors(Some(cfg.first_week), |w| w.succ())
        .take(cfg.weeks as usize)
        .collect()
}

fn controversial(i: usize) -> bool {
    i % 10 == 5
}

pub fn plan(cfg: &SynthConfig) -> Plan {
    let weeks = weeks_of(cfg);
    let controversy_tweets = (0..cfg.tweets).filter(|&i| controversial(i)).count();
    Plan {
        negative_week: weeks[2],
        themes: vec![
            Theme { week: weeks[3], signature: "baltimore", words: BALTIMORE },
            Theme { week: weeks[4], signature: "toilet", words: TOILET },
        ],
        weeks,
        controversy_tweets,
        us_controversy_tweets: (0..controversy_tweets).filter(|n| n % 5 < 3).count(),
    }
}

fn pick_country(rng: &mut ChaCha8Rng) -> Option<&'static str> {
    COUNTRIES
        .choose_weighted(rng, |(_, w)| *w)
        .expect("weights are positive")
        .0
}

fn sentiment_words(rng: &mut ChaCha8Rng, neg_share: f64, out: &mut Vec<String>) {
    for _ in 0..rng.random_range(1..=2) {
        let pool = if rng.random_bool(neg_share) { NEGATIVE } else { POSITIVE };
        out.push(pool.choose(rng).expect("non-empty").to_string());
    }
}

fn pick_words(rng: &mut ChaCha8Rng, pool: &[&str], n: RangeInclusive<usize>, out: &mut Vec<String>) {
    let n = rng.random_range(n);
    for w in pool.choose_multiple(rng, n) {
        out.push(w.to_string());
    }
}

/// Interleave stopwords, shuffle content words and wrap with Twitter noise.
fn render(rng: &mut ChaCha8Rng, mut words: Vec<String>, retweet: bool) -> String {
    use rand::seq::SliceRandom;
    words.shuffle(rng);
    let mut parts = Vec::new();
    if retweet {
        parts.push(format!("RT @user{}:", rng.random_range(1..500)));
    } else if rng.random_bool(0.2) {
        parts.push(format!("@friend{}", rng.random_range(1..500)));
    }
    for w in words {
        if rng.random_bool(0.5) {
            parts.push(STOP.choose(rng).expect("non-empty").to_string());
        }
        parts.push(w);
    }
    parts.push(STOP.choose(rng).expect("non-empty").to_string());
    if rng.random_bool(0.15) {
        parts.push(format!("https://t.co/x{}", rng.random_range(1000..9999)));
    }
    let mut text = parts.join(" ");
    if rng.random_bool(0.3) {
        text.push('!');
    }
    text
}

/// Generate the corpus, sorted by `created_at`, with ids `s000001`, ...
pub fn generate(cfg: &SynthConfig) -> Vec<RawTweet> {
    let plan = plan(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut controversy_seen = 0usize;
    let mut rows: Vec<(DateTime<Utc>, RawTweet)> = Vec::with_capacity(cfg.tweets);

    for i in 0..cfg.tweets {
        let week_idx = rng.random_range(0..plan.weeks.len());
        let week = plan.weeks[week_idx];
        let monday = week.monday().and_hms_opt(0, 0, 0).expect("midnight").and_utc();
        let created_at = monday + Duration::seconds(rng.random_range(0..7 * 86_400));
        let neg_share = if week == plan.negative_week { NEG_SHARE_PLANTED } else { NEG_SHARE };
        let retweet = rng.random_bool(0.1);
        let mut words = Vec::new();
        let mut lang = Some("en");
        let country;

        if controversial(i) {
            words.push(CONTROVERSY.choose(&mut rng).expect("non-empty").to_string());
            pick_words(&mut rng, CONTROVERSY_CONTEXT, 1..=2, &mut words);
            pick_words(&mut rng, BACKGROUND, 2..=2, &mut words);
            country = if controversy_seen % 5 < 3 {
                Some("US")
            } else {
                *OTHER_CONTROVERSY_COUNTRIES.choose(&mut rng).expect("non-empty")
            };
            controversy_seen += 1;
        } else if let Some(theme) = plan
            .themes
            .iter()
            .find(|t| t.week == week)
            .filter(|_| rng.random_bool(THEME_SHARE))
        {
            words.push(theme.signature.to_string());
            pick_words(&mut rng, theme.words, 3..=5, &mut words);
            pick_words(&mut rng, BACKGROUND, 1..=1, &mut words);
            country = pick_country(&mut rng);
        } else if rng.random_bool(0.03) {
            let (l, text) = FOREIGN.choose(&mut rng).expect("non-empty");
            lang = Some(l);
            country = pick_country(&mut rng);
            rows.push((created_at, raw(created_at, text.to_string(), lang, country, retweet, &mut rng)));
            continue;
        } else {
            pick_words(&mut rng, BACKGROUND, 4..=6, &mut words);
            country = pick_country(&mut rng);
        }
        sentiment_words(&mut rng, neg_share, &mut words);
        if rng.random_bool(0.1) {
            lang = None;
        }
        let text = render(&mut rng, words, retweet);
        rows.push((created_at, raw(created_at, text, lang, country, retweet, &mut rng)));
    }

    rows.sort_by_key(|(t, _)| *t);
    rows.into_iter()
        .enumerate()
        .map(|(n, (_, mut t))| {
            t.id = format!("s{:06}", n + 1);
            t
        })
        .collect()
}

fn raw(
    created_at: DateTime<Utc>,
    text: String,
    lang: Option<&str>,
    country: Option<&str>,
    is_retweet: bool,
    rng: &mut ChaCha8Rng,
) -> RawTweet {
    RawTweet {
        id: String::new(),
        created_at,
        text,
        lang: lang.map(String::from),
        country: country.map(String::from),
        user_id: format!("u{}", rng.random_range(1..800)),
        is_retweet,
    }
}

/// One JSON object per line.
pub fn to_jsonl(tweets: &[RawTweet]) -> String {
    let mut out = String::new();
    for t in tweets {
        out.push_str(&serde_json::to_string(t).expect("tweets always serialize"));
        out.push('\n');
    }
    out
}
