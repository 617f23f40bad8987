//! Analysis toolkit for labeled fake/real news corpora.
//!
//! The crate is organised around the stages of the pipeline:
//!
//! * [`corpus`] loads posts, computes descriptive statistics and plans
//!   stratified folds.
//! * [`features`] extracts hashtags/mentions and the per-post behavioral
//!   feature record, and applies tag elimination.
//! * [`sentiment`] assigns five-class sentiment labels and computes the
//!   Concern Index together with its significance test.
//! * [`encoder`] turns posts into token-id sequences (with optional
//!   feature-token injection) and trains an LSTM classifier over them.
//! * [`models`] holds the RBF-kernel SVM, evaluation, cross-validation and
//!   the agreement ensemble.
//! * [`topics`] implements the hybrid LDA + embedding + autoencoder +
//!   K-means topic pipeline with coherence-based cluster-count selection.
//! * [`report`] renders CSV tables and SVG bar charts.
//! * [`synthetic`] generates seeded corpora with known structure.

pub mod corpus;
pub mod encoder;
pub mod features;
pub mod linalg;
pub mod models;
pub mod report;
pub mod sentiment;
pub mod synthetic;
pub mod topics;

mod rng;

pub use corpus::{Corpus, CorpusStats, FoldPlan, Label, Post};
pub use features::{BehavioralFeatures, EliminationMode, TagKind};
pub use sentiment::{SentimentDistribution, SentimentLabel};

/// Version string recorded in emitted reports and model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
