use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::autoencoder::{train_autoencoder, AutoencoderConfig};
use super::coherence::umass_coherence;
use super::kmeans::kmeans_best_of;
use super::lda::{train_lda, LdaConfig, LdaModel};
use super::TopicError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// LDA document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub lda_iterations: usize,
    pub autoencoder: AutoencoderConfig,
    pub kmeans_max_iters: usize,
    pub kmeans_restarts: usize,
    pub top_n: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: None,
            beta: 0.01,
            lda_iterations: 1000,
            autoencoder: AutoencoderConfig::default(),
            kmeans_max_iters: 300,
            kmeans_restarts: 10,
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordWeight {
    pub word: String,
    pub count: usize,
    /// Share of all tokens in the cluster.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTopic {
    pub cluster: usize,
    pub size: usize,
    pub words: Vec<WordWeight>,
    pub coherence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub mean_coherence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub k: usize,
    pub top_n: usize,
    pub seed: u64,
    pub clusters: Vec<ClusterTopic>,
    pub mean_coherence: f64,
    /// Cluster index of every document.
    pub assignments: Vec<usize>,
}

impl TopicReport {
    pub fn word_lists(&self, top_n: usize) -> Vec<Vec<String>> {
        self.clusters
            .iter()
            .map(|c| c.words.iter().take(top_n).map(|w| w.word.clone()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best_k: usize,
    pub table: Vec<KScore>,
    pub report: TopicReport,
}

/// Per-document `[θ_d ‖ embedding_d]`.
pub fn hybrid_vectors(
    lda: &LdaModel,
    embeddings: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, TopicError> {
    if embeddings.len() != lda.num_docs() {
        return Err(TopicError::AlignmentMismatch {
            docs: lda.num_docs(),
            embeddings: embeddings.len(),
        });
    }
    let e = embeddings.first().map_or(0, Vec::len);
    if e == 0 {
        return Err(TopicError::EmptyEmbedding);
    }
    embeddings
        .iter()
        .enumerate()
        .map(|(d, emb)| {
            if emb.len() != e {
                return Err(TopicError::DimensionMismatch {
                    expected: e,
                    got: emb.len(),
                });
            }
            let mut v = lda.theta(d);
            v.extend_from_slice(emb);
            Ok(v)
        })
        .collect()
}

/// Most frequent tokens over the member documents, ties alphabetical.
pub fn cluster_top_words(docs: &[Vec<String>], members: &[usize], top_n: usize) -> Vec<WordWeight> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for &d in members {
        for w in &docs[d] {
            *counts.entry(w).or_insert(0) += 1;
            total += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(top_n)
        .map(|(word, count)| WordWeight {
            word: word.to_string(),
            count,
            weight: count as f64 / total as f64,
        })
        .collect()
}

/// LDA with `k` topics, hybrid vectors, autoencoder, then K-means with `k`
/// clusters. Stage seeds are derived from `seed`.
pub fn run_pipeline(
    docs: &[Vec<String>],
    embeddings: &[Vec<f64>],
    k: usize,
    config: &PipelineConfig,
    seed: u64,
) -> Result<TopicReport, TopicError> {
    let lda = train_lda(
        docs,
        &LdaConfig {
            k,
            alpha: config.alpha,
            beta: config.beta,
            iterations: config.lda_iterations,
            seed,
        },
    )?;
    let hybrid = hybrid_vectors(&lda, embeddings)?;
    let input_dim = hybrid[0].len();
    let ae_config = AutoencoderConfig {
        latent_dim: config.autoencoder.latent_dim.min(input_dim - 1).max(1),
        seed: seed.wrapping_add(1),
        ..config.autoencoder.clone()
    };
    let ae = train_autoencoder(&hybrid, &ae_config)?;
    let latent: Vec<Vec<f64>> = hybrid
        .iter()
        .map(|v| ae.encode_latent(v))
        .collect::<Result<_, _>>()?;
    let clusters = kmeans_best_of(
        &latent,
        k,
        seed.wrapping_add(2),
        config.kmeans_max_iters,
        config.kmeans_restarts.max(1),
    )?;
    let mut topics: Vec<ClusterTopic> = (0..k)
        .map(|c| {
            let members = clusters.members(c);
            ClusterTopic {
                cluster: c,
                size: members.len(),
                words: cluster_top_words(docs, &members, config.top_n),
                coherence: 0.0,
            }
        })
        .collect();
    let lists: Vec<Vec<String>> = topics
        .iter()
        .map(|t| t.words.iter().map(|w| w.word.clone()).collect())
        .collect();
    let coherence = umass_coherence(&lists, docs, config.top_n)?;
    for (t, c) in topics.iter_mut().zip(&coherence.per_topic) {
        t.coherence = *c;
    }
    Ok(TopicReport {
        k,
        top_n: config.top_n,
        seed,
        clusters: topics,
        mean_coherence: coherence.mean,
        assignments: clusters.assignments,
    })
}

const TIE_TOLERANCE: f64 = 1e-9;

/// Runs the pipeline for every k in `range` (seed `seed + k`) and keeps the
/// k with the highest mean coherence; near-ties go to the smaller k.
pub fn select_k(
    docs: &[Vec<String>],
    embeddings: &[Vec<f64>],
    range: RangeInclusive<usize>,
    config: &PipelineConfig,
    seed: u64,
) -> Result<Selection, TopicError> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo < 2 || lo > hi {
        return Err(TopicError::InvalidRange { lo, hi });
    }
    let reports: Vec<TopicReport> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            run_pipeline(docs, embeddings, k, config, seed.wrapping_add(k as u64)).map_err(|e| {
                TopicError::AtK {
                    k,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_, _>>()?;
    let table: Vec<KScore> = reports
        .iter()
        .map(|r| KScore {
            k: r.k,
            mean_coherence: r.mean_coherence,
        })
        .collect();
    let mut best = 0;
    for (i, s) in table.iter().enumerate().skip(1) {
        let current = table[best].mean_coherence;
        if s.mean_coherence > current + TIE_TOLERANCE * current.abs().max(1.0) {
            best = i;
        }
    }
    Ok(Selection {
        best_k: table[best].k,
        table,
        report: reports.into_iter().nth(best).expect("index in range"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub top_n: usize,
    /// `values[i][j]` compares cluster `i` of the first report with cluster
    /// `j` of the second.
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn transpose(&self) -> SimilarityMatrix {
        let cols = self.values.first().map_or(0, Vec::len);
        SimilarityMatrix {
            top_n: self.top_n,
            values: (0..cols)
                .map(|j| self.values.iter().map(|row| row[j]).collect())
                .collect(),
        }
    }
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Jaccard similarity of the top-`top_n` word sets of every cluster pair.
pub fn topic_similarity(
    a: &TopicReport,
    b: &TopicReport,
    top_n: usize,
) -> Result<SimilarityMatrix, TopicError> {
    if top_n < 1 {
        return Err(TopicError::TopNTooSmall { top_n, min: 1 });
    }
    if a.clusters.is_empty() || b.clusters.is_empty() {
        return Err(TopicError::ZeroClusters);
    }
    let sets = |r: &TopicReport| -> Vec<BTreeSet<String>> {
        r.word_lists(top_n)
            .into_iter()
            .map(|l| l.into_iter().collect())
            .collect()
    };
    let (sa, sb) = (sets(a), sets(b));
    let values = sa
        .iter()
        .map(|x| {
            let x: BTreeSet<&str> = x.iter().map(String::as_str).collect();
            sb.iter()
                .map(|y| jaccard(&x, &y.iter().map(String::as_str).collect()))
                .collect()
        })
        .collect();
    Ok(SimilarityMatrix { top_n, values })
}
