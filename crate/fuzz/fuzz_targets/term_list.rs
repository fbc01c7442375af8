#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::controversy::{match_terms, TermList};
use tweetscope_core::ingest::tokenize;

fuzz_target!(|text: &str| {
    if let Ok(terms) = TermList::parse(text) {
        let tokens = tokenize(text);
        for m in match_terms(&tokens, &terms) {
            assert!(terms.contains(&m));
        }
        for p in terms.phrases() {
            let words = tokenize(p);
            assert!(match_terms(&words, &terms).iter().any(|m| m == p));
        }
    }
});
