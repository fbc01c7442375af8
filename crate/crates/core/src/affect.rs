//! Per-tweet sentiment and emotion scores.

use serde::{Deserialize, Serialize};

use crate::lexicon::{Emotion, EmotionLexicon, SentimentLexicon};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub sum: i64,
    /// `sum / matched`, or 0 when nothing matched.
    pub mean: f64,
    pub positivity: u64,
    pub negativity: u64,
    pub matched: u64,
}

impl SentimentScore {
    fn add(&mut self, valence: i32) {
        self.sum += i64::from(valence);
        if valence > 0 {
            self.positivity += valence as u64;
        } else {
            self.negativity += valence.unsigned_abs() as u64;
        }
        self.matched += 1;
    }

    fn finish(mut self) -> Self {
        self.mean = if self.matched == 0 {
            0.0
        } else {
            self.sum as f64 / self.matched as f64
        };
        self
    }
}

/// Greedy left-to-right longest match: at each position try the longest
/// lexicon phrase first, consume its tokens on a hit, otherwise advance by one.
pub fn score_sentiment<S: AsRef<str>>(tokens: &[S], lex: &SentimentLexicon) -> SentimentScore {
    let mut score = SentimentScore::default();
    let max_words = lex.max_words().max(1);
    let mut key = String::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = max_words.min(tokens.len() - i);
        let hit = (1..=longest).rev().find_map(|n| {
            key.clear();
            for (j, t) in tokens[i..i + n].iter().enumerate() {
                if j > 0 {
                    key.push(' ');
                }
                key.push_str(t.as_ref());
            }
            lex.get(&key).map(|v| (n, v))
        });
        match hit {
            Some((n, valence)) => {
                score.add(valence);
                i += n;
            }
            None => i += 1,
        }
    }
    score.finish()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmotionVector {
    /// Indexed by [`Emotion::index`].
    pub counts: [u64; 8],
    /// `counts / sum(counts)`, all zeros when nothing matched.
    pub normalized: [f64; 8],
}

impl EmotionVector {
    pub fn from_counts(counts: [u64; 8]) -> Self {
        let total: u64 = counts.iter().sum();
        let mut normalized = [0.0; 8];
        if total > 0 {
            for (n, c) in normalized.iter_mut().zip(counts) {
                *n = c as f64 / total as f64;
            }
        }
        Self { counts, normalized }
    }

    pub fn count(&self, e: Emotion) -> u64 {
        self.counts[e.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Each token occurrence increments every emotion its word is associated with.
pub fn score_emotions<S: AsRef<str>>(tokens: &[S], lex: &EmotionLexicon) -> EmotionVector {
    let mut counts = [0u64; 8];
    for t in tokens {
        for e in lex.get(t.as_ref()).iter() {
            counts[e.index()] += 1;
        }
    }
    EmotionVector::from_counts(counts)
}
