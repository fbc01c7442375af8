#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::{score_emotions, EmotionLexicon};

fuzz_target!(|text: &str| {
    if let Ok(lex) = EmotionLexicon::parse(text) {
        for (word, set) in lex.iter() {
            let v = score_emotions(&[word], &lex);
            assert_eq!(v.total() as usize, set.iter().count());
        }
    }
});
