use std::collections::BTreeMap;

use tweetscope_core::aggregate::{build_snapshot, query, score_corpus, Metric, SeriesPoint};
use tweetscope_core::controversy::{country_breakdown, scan_corpus, TermList};
use tweetscope_core::ingest::{stem, JsonlReader, Stopwords, Strictness};
use tweetscope_core::synth::{plan, SynthConfig};
use tweetscope_core::topics::{weekly_topics, LdaConfig, VocabConfig};
use tweetscope_core::{Corpus, EmotionLexicon, Granularity, SentimentLexicon, BUNDLED_FIXTURE};

fn corpus() -> Corpus {
    let reader = JsonlReader::new(BUNDLED_FIXTURE.as_bytes(), Strictness::FailFast);
    Corpus::ingest(reader, &Stopwords::bundled()).unwrap()
}

#[test]
fn counts_add_up() {
    let c = corpus();
    assert_eq!(c.counts.loaded, 2000);
    assert_eq!(c.counts.skipped, 0);
    assert!(c.counts.filtered > 0, "foreign-language tweets are filtered");
    assert_eq!(c.len() as u64 + c.counts.filtered, 2000);
}

#[test]
fn negative_week_has_lowest_sentiment() {
    let c = corpus();
    let scores = score_corpus(&c, &SentimentLexicon::bundled(), &EmotionLexicon::bundled());
    let snap = build_snapshot(&c, &scores).unwrap();
    let p = plan(&SynthConfig::default());
    let first = p.weeks.first().unwrap().to_string();
    let last = p.weeks.last().unwrap().to_string();
    let series = query(&snap, Metric::Sentiment, Granularity::Week, &first, &last, None).unwrap();
    let means: Vec<(String, f64)> = series
        .points
        .iter()
        .map(|pt| match pt {
            SeriesPoint::Sentiment(s) => (s.period.clone(), s.mean.unwrap()),
            _ => unreachable!(),
        })
        .collect();
    let min = means.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(min.0, p.negative_week.to_string(), "{means:?}");
}

#[test]
fn controversy_is_mostly_us() {
    let c = corpus();
    let hits = scan_corpus(&c, &TermList::bundled());
    let p = plan(&SynthConfig::default());
    let tweets: std::collections::HashSet<_> = hits.iter().map(|h| &h.tweet_id).collect();
    assert_eq!(tweets.len(), p.controversy_tweets);
    let b = country_breakdown(&hits);
    assert_eq!(b.counts["US"], p.us_controversy_tweets as u64);
    assert!(b.fraction("US").unwrap() > 0.5);
}

#[test]
fn planted_themes_surface_in_their_week() {
    let c = corpus();
    let topics = weekly_topics(&c, &LdaConfig::default(), &VocabConfig::default(), 10).unwrap();
    assert!(topics.skipped.is_empty());
    let p = plan(&SynthConfig::default());
    for theme in &p.themes {
        let sig = stem(theme.signature);
        let week: &Vec<Vec<_>> = &topics.weeks[&theme.week];
        let found = week.iter().any(|t| t.iter().any(|w| w.term == sig));
        let tops: BTreeMap<usize, Vec<&str>> = week
            .iter()
            .enumerate()
            .map(|(k, t)| (k, t.iter().map(|w| w.term.as_str()).collect()))
            .collect();
        assert!(found, "{sig} missing in {}: {tops:?}", theme.week);
    }
}
