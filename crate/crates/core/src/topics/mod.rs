//! Hybrid topic identification: LDA topic mixtures concatenated with sentence
//! embeddings, compressed by an autoencoder and clustered with K-means. The
//! cluster count is picked by UMass coherence.

mod autoencoder;
mod coherence;
mod kmeans;
mod lda;
mod pipeline;
mod preprocess;

use thiserror::Error;

pub use autoencoder::{
    train_autoencoder, AeGradients, AutoencoderConfig, AutoencoderModel, Optimizer,
};
pub use coherence::{umass_coherence, Coherence};
pub use kmeans::{distinct_points, kmeans, kmeans_best_of, ClusterModel};
pub use lda::{train_lda, train_lda_traced, LdaConfig, LdaModel};
pub use pipeline::{
    cluster_top_words, hybrid_vectors, run_pipeline, select_k, topic_similarity, ClusterTopic,
    KScore, PipelineConfig, Selection, SimilarityMatrix, TopicReport, WordWeight,
};
pub use preprocess::{default_stopwords, preprocess_topic_text, stem, PreprocessConfig, Stemmer};

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("no tokens left after preprocessing")]
    EmptyCorpus,
    #[error("need at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error("{docs} documents but {embeddings} embeddings")]
    AlignmentMismatch { docs: usize, embeddings: usize },
    #[error("embeddings must have at least one dimension")]
    EmptyEmbedding,
    #[error("expected {expected}-dimensional vector, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("latent dimension {latent} must be below input dimension {input}")]
    LatentTooLarge { latent: usize, input: usize },
    #[error("need at least 2 vectors to train, got {0}")]
    TooFewVectors(usize),
    #[error("loss became non-finite in epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("k = {k} exceeds the {distinct} distinct points")]
    TooManyClusters { k: usize, distinct: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("top_n must be at least {min}, got {top_n}")]
    TopNTooSmall { top_n: usize, min: usize },
    #[error("no documents to score against")]
    NoDocuments,
    #[error("invalid k range {lo}..={hi}")]
    InvalidRange { lo: usize, hi: usize },
    #[error("k = {k}: {source}")]
    AtK {
        k: usize,
        #[source]
        source: Box<TopicError>,
    },
}
