use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use tweetscope_core::topics::{build_vocab, fit_lda, fit_lda_observed, LdaConfig, LdaModel};

fn random_corpus(docs: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| {
            let len = rng.random_range(1..=15);
            (0..len).map(|_| format!("w{:02}", rng.random_range(0..vocab))).collect()
        })
        .collect()
}

/// 100 documents from each of two disjoint 10-word vocabularies, 20 tokens each.
fn planted_corpus(seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|d| {
            let prefix = if d < 100 { "alpha" } else { "beta" };
            (0..20).map(|_| format!("{prefix}{}", rng.random_range(0..10))).collect()
        })
        .collect()
}

/// Mean over topics of the share of top-5 words from the topic's majority vocabulary.
fn purity(model: &LdaModel) -> f64 {
    let mut total = 0.0;
    for k in 0..model.topics() {
        let top = model.top_words(k, 5).unwrap();
        let alpha = top.iter().filter(|t| t.term.starts_with("alpha")).count();
        total += alpha.max(top.len() - alpha) as f64 / top.len() as f64;
    }
    total / model.topics() as f64
}

#[test]
fn counts_and_distributions_hold_after_every_sweep() {
    let docs = random_corpus(50, 40, 3);
    let vocab = build_vocab(&docs, 1, 1.0).unwrap();
    let cfg = LdaConfig { iterations: 50, burn_in: 10, ..LdaConfig::with_topics(5) };
    let mut sweeps = 0;
    fit_lda_observed(&docs, vocab, &cfg, |state| {
        sweeps += 1;
        state.check_counts().unwrap();
        for (d, row) in state.doc_topic_counts().iter().enumerate() {
            assert_eq!(row.iter().map(|&c| c as usize).sum::<usize>(), state.docs()[d].len());
        }
        let total: u64 = state.topic_totals().iter().sum();
        assert_eq!(total as usize, state.docs().iter().map(Vec::len).sum::<usize>());
        for row in state.theta().iter().chain(state.phi().iter()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    })
    .unwrap();
    assert_eq!(sweeps, 50);
}

#[test]
fn single_topic_matches_closed_form() {
    let docs = random_corpus(10, 12, 11);
    let cfg = LdaConfig { iterations: 20, burn_in: 0, ..LdaConfig::with_topics(1) };
    let model = fit_lda(&docs, &cfg).unwrap();
    let n: usize = docs.iter().map(Vec::len).sum();
    let v = model.vocab.len() as f64;
    for (w, term) in model.vocab.terms().iter().enumerate() {
        let count = docs.iter().flatten().filter(|t| *t == term).count() as f64;
        let expected = (count + cfg.beta) / (n as f64 + v * cfg.beta);
        assert!((model.phi[0][w] - expected).abs() <= 1e-12, "{term}");
    }
}

#[test]
fn recovers_planted_topics() {
    let docs = planted_corpus(2020);
    let mut passing = 0;
    for seed in [42, 1, 2, 3, 4] {
        let cfg = LdaConfig { alpha: 0.5, beta: 0.01, iterations: 500, burn_in: 100, seed, topics: 2 };
        let start = Instant::now();
        let model = fit_lda(&docs, &cfg).unwrap();
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 10.0, "seed {seed} took {elapsed:?}");
        if purity(&model) >= 0.9 {
            passing += 1;
        }
    }
    assert!(passing >= 4, "only {passing}/5 seeds reached purity 0.9");
}

#[test]
fn same_seed_same_model() {
    let docs = random_corpus(30, 20, 5);
    let cfg = LdaConfig { iterations: 30, burn_in: 5, ..LdaConfig::with_topics(3) };
    let a = fit_lda(&docs, &cfg).unwrap();
    let b = fit_lda(&docs, &cfg).unwrap();
    assert_eq!(a.z, b.z);
    assert_eq!(a.phi, b.phi);
}
