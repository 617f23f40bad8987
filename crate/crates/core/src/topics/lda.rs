//! LDA fitted by collapsed Gibbs sampling.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 6,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Word strings indexed by word id (sorted).
    pub vocab: Vec<String>,
    pub docs: Vec<Vec<usize>>,
    /// Topic of every token, aligned with `docs`.
    pub assignments: Vec<Vec<usize>>,
    /// `doc_topic[d][k]`
    pub doc_topic: Vec<Vec<u32>>,
    /// `topic_word[k][w]`
    pub topic_word: Vec<Vec<u32>>,
    pub topic_totals: Vec<u32>,
}

impl LdaModel {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// `θ_dk = (n_dk + α) / (n_d + Kα)`
    pub fn theta(&self, d: usize) -> Vec<f64> {
        let n_d = self.docs[d].len() as f64;
        let den = n_d + self.k as f64 * self.alpha;
        self.doc_topic[d]
            .iter()
            .map(|&c| (c as f64 + self.alpha) / den)
            .collect()
    }

    /// `φ_kw = (n_kw + β) / (n_k + Vβ)`
    pub fn phi(&self, k: usize) -> Vec<f64> {
        let v = self.vocab.len() as f64;
        let den = self.topic_totals[k] as f64 + v * self.beta;
        self.topic_word[k]
            .iter()
            .map(|&c| (c as f64 + self.beta) / den)
            .collect()
    }

    /// Highest-probability words of topic `k`, ties alphabetical.
    pub fn top_words(&self, k: usize, n: usize) -> Vec<(String, f64)> {
        let phi = self.phi(k);
        let mut idx: Vec<usize> = (0..phi.len()).collect();
        idx.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
        idx.into_iter()
            .take(n)
            .map(|w| (self.vocab[w].clone(), phi[w]))
            .collect()
    }

    fn sweep(&mut self, rng: &mut rng::Rng, weights: &mut [f64]) {
        let v_beta = self.vocab.len() as f64 * self.beta;
        for d in 0..self.docs.len() {
            for t in 0..self.docs[d].len() {
                let w = self.docs[d][t];
                let old = self.assignments[d][t];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for (k, slot) in weights.iter_mut().enumerate() {
                    total += (self.doc_topic[d][k] as f64 + self.alpha)
                        * (self.topic_word[k][w] as f64 + self.beta)
                        / (self.topic_totals[k] as f64 + v_beta);
                    *slot = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(self.k - 1);

                self.assignments[d][t] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }
}

pub fn train_lda(docs: &[Vec<String>], config: &LdaConfig) -> Result<LdaModel, TopicError> {
    train_lda_traced(docs, config, |_, _| {})
}

/// Like [`train_lda`], calling `on_sweep(iteration, model)` after every
/// Gibbs sweep.
pub fn train_lda_traced(
    docs: &[Vec<String>],
    config: &LdaConfig,
    mut on_sweep: impl FnMut(usize, &LdaModel),
) -> Result<LdaModel, TopicError> {
    let k = config.k;
    if k < 2 {
        return Err(TopicError::TooFewTopics(k));
    }
    let ids: BTreeMap<&str, usize> = docs
        .iter()
        .flatten()
        .map(String::as_str)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    if ids.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    let vocab: Vec<String> = ids.keys().map(|w| w.to_string()).collect();
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|w| ids[w.as_str()]).collect())
        .collect();

    let mut rng = rng::seeded(config.seed);
    let mut model = LdaModel {
        k,
        alpha: config.alpha.unwrap_or(50.0 / k as f64),
        beta: config.beta,
        seed: config.seed,
        doc_topic: vec![vec![0; k]; encoded.len()],
        topic_word: vec![vec![0; vocab.len()]; k],
        topic_totals: vec![0; k],
        assignments: Vec::with_capacity(encoded.len()),
        vocab,
        docs: Vec::new(),
    };
    for (d, doc) in encoded.iter().enumerate() {
        let mut z = Vec::with_capacity(doc.len());
        for &w in doc {
            let t = rng.gen_range(0..k);
            model.doc_topic[d][t] += 1;
            model.topic_word[t][w] += 1;
            model.topic_totals[t] += 1;
            z.push(t);
        }
        model.assignments.push(z);
    }
    model.docs = encoded;

    let mut weights = vec![0.0; k];
    for it in 0..config.iterations {
        model.sweep(&mut rng, &mut weights);
        on_sweep(it, &model);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn single_word_corpus_concentrates_phi() {
        let docs = vec![words("flu flu flu flu flu")];
        let m = train_lda(
            &docs,
            &LdaConfig {
                k: 3,
                iterations: 20,
                ..LdaConfig::default()
            },
        )
        .unwrap();
        for k in 0..3 {
            assert!(m.phi(k)[0] >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn distributions_normalize() {
        let docs = vec![words("a b c a"), words("c d e"), vec![]];
        let m = train_lda(
            &docs,
            &LdaConfig {
                k: 2,
                iterations: 30,
                ..LdaConfig::default()
            },
        )
        .unwrap();
        for d in 0..3 {
            assert!((m.theta(d).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for k in 0..2 {
            assert!((m.phi(k).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.theta(2), vec![0.5, 0.5]);
    }

    #[test]
    fn deterministic_assignments() {
        let docs = vec![words("a b c a"), words("c d e"), words("e e a")];
        let cfg = LdaConfig {
            k: 2,
            iterations: 50,
            seed: 4,
            ..LdaConfig::default()
        };
        assert_eq!(
            train_lda(&docs, &cfg).unwrap().assignments,
            train_lda(&docs, &cfg).unwrap().assignments
        );
    }

    #[test]
    fn contract_errors() {
        let cfg = LdaConfig {
            k: 1,
            ..LdaConfig::default()
        };
        assert_eq!(
            train_lda(&[words("a")], &cfg),
            Err(TopicError::TooFewTopics(1))
        );
        assert_eq!(
            train_lda(&[vec![]], &LdaConfig::default()),
            Err(TopicError::EmptyCorpus)
        );
    }
}
