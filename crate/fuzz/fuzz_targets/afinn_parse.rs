#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::{score_sentiment, SentimentLexicon};

fuzz_target!(|text: &str| {
    if let Ok(lex) = SentimentLexicon::parse(text) {
        for (term, score) in lex.iter() {
            assert!((-5..=5).contains(&score));
            let tokens: Vec<&str> = term.split(' ').collect();
            assert_eq!(score_sentiment(&tokens, &lex).sum, i64::from(score));
        }
    }
});
