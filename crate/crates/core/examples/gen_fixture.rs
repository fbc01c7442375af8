//! Regenerate `data/fixtures/synthetic_2000.jsonl`.

use tweetscope_core::synth::{generate, to_jsonl, SynthConfig};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures/synthetic_2000.jsonl");
    std::fs::write(path, to_jsonl(&generate(&SynthConfig::default()))).expect("write fixture");
    println!("wrote {path}");
}
