//! Collapsed Gibbs sampler state for LDA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LdaConfig;

/// Topic assignments and the count tables they induce.
///
/// `docs` holds vocabulary ids. The invariants maintained across sweeps are
/// `sum_k n_dk[d][k] == docs[d].len()` and `sum_w n_kw[k][w] == n_k[k]`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    alpha: f64,
    beta: f64,
    vocab_size: usize,
    docs: Vec<Vec<usize>>,
    z: Vec<Vec<usize>>,
    n_dk: Vec<Vec<u32>>,
    n_kw: Vec<Vec<u32>>,
    n_k: Vec<u64>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
    sweeps: usize,
}

impl GibbsState {
    /// Assign every position a topic drawn uniformly from the seeded generator.
    pub fn init(docs: Vec<Vec<usize>>, vocab_size: usize, cfg: &LdaConfig) -> Self {
        let k = cfg.topics;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut n_dk = vec![vec![0u32; k]; docs.len()];
        let mut n_kw = vec![vec![0u32; vocab_size]; k];
        let mut n_k = vec![0u64; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        n_dk[d][t] += 1;
                        n_kw[t][w] += 1;
                        n_k[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Self {
            alpha: cfg.alpha,
            beta: cfg.beta,
            vocab_size,
            docs,
            z,
            n_dk,
            n_kw,
            n_k,
            rng,
            weights: vec![0.0; k],
            sweeps: 0,
        }
    }

    /// Resample every position of every document once.
    pub fn sweep(&mut self) {
        let vbeta = self.vocab_size as f64 * self.beta;
        let topics = self.n_k.len();
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.z[d][i];
                self.n_dk[d][old] -= 1;
                self.n_kw[old][w] -= 1;
                self.n_k[old] -= 1;

                let mut total = 0.0;
                for k in 0..topics {
                    let p = (f64::from(self.n_dk[d][k]) + self.alpha)
                        * (f64::from(self.n_kw[k][w]) + self.beta)
                        / (self.n_k[k] as f64 + vbeta);
                    total += p;
                    self.weights[k] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self
                    .weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(topics - 1);

                self.z[d][i] = new;
                self.n_dk[d][new] += 1;
                self.n_kw[new][w] += 1;
                self.n_k[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn docs(&self) -> &[Vec<usize>] {
        &self.docs
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u32>] {
        &self.n_dk
    }

    pub fn topic_word_counts(&self) -> &[Vec<u32>] {
        &self.n_kw
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.n_k
    }

    /// θ[d][k] = (n_dk + α) / (len(d) + Kα)
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let k = self.n_k.len() as f64;
        self.n_dk
            .iter()
            .zip(&self.docs)
            .map(|(row, doc)| {
                let denom = doc.len() as f64 + k * self.alpha;
                row.iter().map(|&c| (f64::from(c) + self.alpha) / denom).collect()
            })
            .collect()
    }

    /// φ[k][w] = (n_kw + β) / (n_k + Vβ)
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.vocab_size as f64 * self.beta;
        self.n_kw
            .iter()
            .zip(&self.n_k)
            .map(|(row, &total)| {
                let denom = total as f64 + vbeta;
                row.iter().map(|&c| (f64::from(c) + self.beta) / denom).collect()
            })
            .collect()
    }

    /// Recount the tables from `z` and compare. Returns a description of the
    /// first discrepancy.
    pub fn check_counts(&self) -> Result<(), String> {
        let topics = self.n_k.len();
        let mut n_dk = vec![vec![0u32; topics]; self.docs.len()];
        let mut n_kw = vec![vec![0u32; self.vocab_size]; topics];
        let mut n_k = vec![0u64; topics];
        for (d, (doc, zs)) in self.docs.iter().zip(&self.z).enumerate() {
            if doc.len() != zs.len() {
                return Err(format!("doc {d}: {} tokens but {} assignments", doc.len(), zs.len()));
            }
            for (&w, &t) in doc.iter().zip(zs) {
                n_dk[d][t] += 1;
                n_kw[t][w] += 1;
                n_k[t] += 1;
            }
        }
        for (d, row) in self.n_dk.iter().enumerate() {
            let total: u64 = row.iter().map(|&c| u64::from(c)).sum();
            if total != self.docs[d].len() as u64 {
                return Err(format!("doc {d}: n_dk sums to {total}, length {}", self.docs[d].len()));
            }
        }
        for (k, row) in self.n_kw.iter().enumerate() {
            let total: u64 = row.iter().map(|&c| u64::from(c)).sum();
            if total != self.n_k[k] {
                return Err(format!("topic {k}: n_kw sums to {total}, n_k is {}", self.n_k[k]));
            }
        }
        if n_dk != self.n_dk || n_kw != self.n_kw || n_k != self.n_k {
            return Err("count tables disagree with assignments".into());
        }
        Ok(())
    }

    pub(super) fn into_parts(self) -> GibbsParts {
        let theta = self.theta();
        let phi = self.phi();
        GibbsParts {
            z: self.z,
            n_dk: self.n_dk,
            n_kw: self.n_kw,
            n_k: self.n_k,
            theta,
            phi,
        }
    }
}

pub(super) struct GibbsParts {
    pub z: Vec<Vec<usize>>,
    pub n_dk: Vec<Vec<u32>>,
    pub n_kw: Vec<Vec<u32>>,
    pub n_k: Vec<u64>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}
