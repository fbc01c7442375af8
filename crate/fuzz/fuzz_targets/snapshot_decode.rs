#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_core::aggregate::{decode, encode};

fuzz_target!(|data: &[u8]| {
    if let Ok(snap) = decode(data) {
        assert_eq!(decode(&encode(&snap)).expect("re-encoded snapshot decodes"), snap);
    }
});
