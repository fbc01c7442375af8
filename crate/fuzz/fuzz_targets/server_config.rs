#![no_main]

use libfuzzer_sys::fuzz_target;
use tweetscope_api::ServerConfig;

fuzz_target!(|text: &str| {
    let _ = ServerConfig::parse(text);
    let _ = ServerConfig::default().with_env(text.lines().filter_map(|l| l.split_once('=')));
});
