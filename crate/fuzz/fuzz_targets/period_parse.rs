#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::period::{parse_day, Period};
use tweetscope_core::{Granularity, WeekKey};

fuzz_target!(|text: &str| {
    if let Ok(w) = text.parse::<WeekKey>() {
        assert_eq!(w.to_string(), text);
    }
    if let Ok(d) = parse_day(text) {
        assert_eq!(tweetscope_core::period::format_day(d), text);
    }
    for g in [Granularity::Day, Granularity::Week] {
        if let Ok(p) = Period::parse(g, text) {
            assert_eq!(p.to_string(), text);
        }
    }
});
