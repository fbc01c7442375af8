#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::ingest::{JsonlReader, Strictness, TweetSource};
use tweetscope_core::synth::to_jsonl;
use tweetscope_core::RawTweet;

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        if let Ok(t) = RawTweet::from_json_line(line) {
            assert!(!t.id.is_empty());
            // Whatever parses must survive a serialize/parse round trip.
            let line = to_jsonl(std::slice::from_ref(&t));
            let again = RawTweet::from_json_line(line.trim_end()).expect("round trip");
            assert_eq!(again, t);
        }
    }
    let lines = data.split(|&b| b == b'\n').count() as u64;
    let mut reader = JsonlReader::new(data, Strictness::SkipMalformed);
    let ok = reader.by_ref().filter(Result::is_ok).count() as u64;
    assert!(ok + reader.skipped() <= lines);
    for r in JsonlReader::new(data, Strictness::FailFast) {
        if r.is_err() {
            break;
        }
    }
});
