#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::ingest::{stem, tokenize};

fuzz_target!(|text: &str| {
    let tokens = tokenize(text);
    for t in &tokens {
        assert!(!t.is_empty());
        assert!(!t.chars().any(char::is_whitespace));
        let s = stem(t);
        assert!(!s.is_empty());
        assert!(s.len() <= t.len());
    }
    assert_eq!(tokenize(&tokens.join(" ")), tokens);
    let _ = stem(text);
});
