//! AFINN sentiment and NRC emotion lexicons.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest AFINN phrase, in words. AFINN-111 has one three-word entry
/// ("does not work").
pub const MAX_PHRASE_WORDS: usize = 3;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn malformed(line: usize, reason: impl Into<String>) -> LexiconError {
    LexiconError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Term → integer valence in [-5, 5].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    entries: HashMap<String, i32>,
    max_words: usize,
}

impl SentimentLexicon {
    /// Parse `term<TAB>score` rows. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = HashMap::new();
        let mut max_words = 0;
        for (idx, row) in text.lines().enumerate() {
            let line = idx + 1;
            let row = row.strip_suffix('\r').unwrap_or(row);
            if row.trim().is_empty() {
                continue;
            }
            let (term, score) = row
                .split_once('\t')
                .ok_or_else(|| malformed(line, "expected term<TAB>score"))?;
            if term.is_empty() || term != term.trim() || term != term.to_lowercase() {
                return Err(malformed(line, format!("term {term:?} is not trimmed lowercase")));
            }
            let words = term.split(' ').count();
            if term.split(' ').any(str::is_empty) || words > MAX_PHRASE_WORDS {
                return Err(malformed(line, format!("term {term:?} has bad spacing")));
            }
            let score: i32 = score
                .trim()
                .parse()
                .map_err(|_| malformed(line, format!("bad score {score:?}")))?;
            if !(-5..=5).contains(&score) {
                return Err(malformed(line, format!("score {score} outside [-5, 5]")));
            }
            if entries.insert(term.to_string(), score).is_some() {
                return Err(malformed(line, format!("duplicate term {term:?}")));
            }
            max_words = max_words.max(words);
        }
        Ok(Self { entries, max_words })
    }

    pub fn load_afinn(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::parse(&read(path.as_ref())?)
    }

    /// The bundled AFINN-111 list.
    pub fn bundled() -> Self {
        Self::parse(crate::BUNDLED_AFINN).expect("bundled AFINN lexicon is valid")
    }

    /// Score of a (space-joined) term.
    pub fn get(&self, term: &str) -> Option<i32> {
        self.entries.get(term).copied()
    }

    /// Number of words in the longest entry.
    pub fn max_words(&self) -> usize {
        self.max_words
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Plutchik's eight primary emotions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Sadness,
    Disgust,
    Surprise,
    Anticipation,
    Trust,
    Joy,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Surprise,
        Emotion::Anticipation,
        Emotion::Trust,
        Emotion::Joy,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Disgust => "disgust",
            Emotion::Surprise => "surprise",
            Emotion::Anticipation => "anticipation",
            Emotion::Trust => "trust",
            Emotion::Joy => "joy",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL.into_iter().find(|e| e.as_str() == s).ok_or(())
    }
}

/// Bit set over [`Emotion`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EmotionSet(u8);

impl EmotionSet {
    pub fn insert(&mut self, e: Emotion) {
        self.0 |= 1 << e.index();
    }

    pub fn contains(&self, e: Emotion) -> bool {
        self.0 & (1 << e.index()) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Emotion> {
        Emotion::ALL.into_iter().filter(move |e| self.contains(*e))
    }
}

/// Word → set of associated emotions. Every word listed in the source file is
/// present, possibly with an empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmotionLexicon {
    entries: HashMap<String, EmotionSet>,
}

impl EmotionLexicon {
    /// Parse NRC word-level rows `word<TAB>category<TAB>flag`. The
    /// `positive`/`negative` polarity rows are validated and dropped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries: HashMap<String, EmotionSet> = HashMap::new();
        for (idx, row) in text.lines().enumerate() {
            let line = idx + 1;
            let row = row.strip_suffix('\r').unwrap_or(row);
            if row.trim().is_empty() {
                continue;
            }
            let mut cols = row.split('\t');
            let (Some(word), Some(category), Some(flag), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(malformed(line, "expected word<TAB>category<TAB>flag"));
            };
            if word.is_empty() || word != word.trim() || word != word.to_lowercase() {
                return Err(malformed(line, format!("word {word:?} is not trimmed lowercase")));
            }
            let flag = match flag.trim() {
                "0" => false,
                "1" => true,
                other => return Err(malformed(line, format!("non-binary flag {other:?}"))),
            };
            let set = entries.entry(word.to_string()).or_default();
            match category {
                "positive" | "negative" => {}
                other => {
                    let emotion: Emotion = other
                        .parse()
                        .map_err(|_| malformed(line, format!("unknown category {other:?}")))?;
                    if flag {
                        set.insert(emotion);
                    }
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn load_nrc(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::parse(&read(path.as_ref())?)
    }

    pub fn bundled() -> Self {
        Self::parse(crate::BUNDLED_NRC).expect("bundled NRC lexicon is valid")
    }

    pub fn get(&self, word: &str) -> EmotionSet {
        self.entries.get(word).copied().unwrap_or_default()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, EmotionSet)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
