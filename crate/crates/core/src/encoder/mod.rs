//! Token-id encoding of posts and the LSTM text classifier.

mod lstm;
mod vocab;

use std::path::PathBuf;

use thiserror::Error;

pub use lstm::{
    train_encoder, train_encoder_fold, EncoderConfig, EncoderModel, EncoderOptions, Gradients,
    LstmParams, Prediction,
};
pub use vocab::{
    feature_token_ids, inject_features, tokenize, word_tokens, TokenSequence, Vocabulary, BOS_ID,
    EOS_ID, FEATURE_BAND, FEATURE_BASE, FEATURE_SLOTS, FIRST_CONTENT_ID, MAX_CONTENT_TOKENS,
    MAX_VOCAB_TOKENS, PAD_ID, UNK_ID,
};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("vocabulary has {tokens} content tokens, limit is {limit}; raise min_freq")]
    VocabularyOverflow { tokens: usize, limit: usize },
    #[error("sequence already carries a feature block")]
    AlreadyInjected,
    #[error("sequence must start with BOS (101) and end with EOS (102)")]
    MalformedSequence,
    #[error("token id {0} is outside the vocabulary and feature ranges")]
    IdOutOfRange(u32),
    #[error("training loss became non-finite in epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("feature injection requires sentiment labels for every post")]
    MissingSentiment,
    #[error("no training examples")]
    EmptyTrainingSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(#[from] serde_json::Error),
}
