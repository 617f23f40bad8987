//! Flat TOML run configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use infodemic::corpus::{Format, Schema};
use infodemic::encoder::{EncoderConfig, EncoderOptions};
use infodemic::models::{GammaMode, SvmConfig};
use infodemic::topics::{AutoencoderConfig, Optimizer, PipelineConfig};
use infodemic::EliminationMode;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// `csv` or `jsonl`; inferred from the input extension when unset.
    pub format: Option<String>,
    pub out: PathBuf,
    pub seed: u64,

    pub text_field: String,
    pub label_field: String,
    pub id_field: Option<String>,
    pub source_field: Option<String>,

    /// `lexicon` or `external`.
    pub sentiment: String,
    pub lexicon: Option<PathBuf>,
    pub sentiment_labels: Option<PathBuf>,

    pub top_tags: usize,

    pub folds: usize,
    pub elimination: String,
    pub inject: bool,
    pub sweep: bool,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub init_scale: f64,
    pub min_freq: usize,

    pub svm_c: f64,
    /// Fixed RBF gamma; one over the feature count when unset.
    pub svm_gamma: Option<f64>,
    pub svm_tol: f64,
    pub svm_max_passes: usize,

    pub k_min: usize,
    pub k_max: usize,
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub lda_iterations: usize,
    pub latent_dim: usize,
    pub ae_learning_rate: f64,
    pub ae_epochs: usize,
    pub ae_batch_size: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_restarts: usize,
    pub top_n: usize,
    pub similarity_threshold: f64,

    pub predictions_a: Option<PathBuf>,
    pub predictions_b: Option<PathBuf>,
    /// `id,label` gold file for `ensemble`; the input corpus is used when unset.
    pub gold: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let enc = EncoderConfig::default();
        let svm = SvmConfig::default();
        let topics = PipelineConfig::default();
        RunConfig {
            input: None,
            format: None,
            out: PathBuf::from("out"),
            seed: 42,
            text_field: "text".into(),
            label_field: "label".into(),
            id_field: Some("id".into()),
            source_field: None,
            sentiment: "lexicon".into(),
            lexicon: None,
            sentiment_labels: None,
            top_tags: 30,
            folds: 5,
            elimination: "none".into(),
            inject: false,
            sweep: false,
            embed_dim: enc.embed_dim,
            hidden_dim: enc.hidden_dim,
            learning_rate: enc.learning_rate,
            epochs: enc.epochs,
            batch_size: enc.batch_size,
            clip_norm: enc.clip_norm,
            init_scale: enc.init_scale,
            min_freq: enc.min_freq,
            svm_c: svm.c,
            svm_gamma: None,
            svm_tol: svm.tol,
            svm_max_passes: svm.max_passes,
            k_min: 3,
            k_max: 10,
            lda_alpha: topics.alpha,
            lda_beta: topics.beta,
            lda_iterations: topics.lda_iterations,
            latent_dim: topics.autoencoder.latent_dim,
            ae_learning_rate: topics.autoencoder.learning_rate,
            ae_epochs: topics.autoencoder.epochs,
            ae_batch_size: topics.autoencoder.batch_size,
            kmeans_max_iters: topics.kmeans_max_iters,
            kmeans_restarts: topics.kmeans_restarts,
            top_n: topics.top_n,
            similarity_threshold: 0.2,
            predictions_a: None,
            predictions_b: None,
            gold: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn input_path(&self) -> Result<&Path, CliError> {
        let p = self
            .input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input corpus given (--input)".into()))?;
        if !p.exists() {
            return Err(CliError::Config(format!(
                "input {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }

    pub fn corpus_format(&self) -> Result<Format, CliError> {
        let raw = match &self.format {
            Some(f) => f.clone(),
            None => self
                .input
                .as_deref()
                .and_then(|p| p.extension())
                .map(|e| e.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into()),
        };
        raw.parse().map_err(CliError::Config)
    }

    pub fn schema(&self) -> Schema {
        Schema {
            text_field: self.text_field.clone(),
            label_field: self.label_field.clone(),
            id_field: self.id_field.clone(),
            source_field: self.source_field.clone(),
            ..Schema::default()
        }
    }

    pub fn elimination_mode(&self) -> Result<EliminationMode, CliError> {
        self.elimination.parse().map_err(CliError::Config)
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            clip_norm: self.clip_norm,
            init_scale: self.init_scale,
            min_freq: self.min_freq,
            seed: self.seed,
        }
    }

    pub fn encoder_options(&self) -> Result<EncoderOptions, CliError> {
        Ok(EncoderOptions {
            inject: self.inject,
            elimination: self.elimination_mode()?,
        })
    }

    pub fn svm_config(&self) -> SvmConfig {
        SvmConfig {
            c: self.svm_c,
            gamma: self.svm_gamma.map_or(GammaMode::Auto, GammaMode::Fixed),
            tol: self.svm_tol,
            max_passes: self.svm_max_passes,
            seed: self.seed,
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            alpha: self.lda_alpha,
            beta: self.lda_beta,
            lda_iterations: self.lda_iterations,
            autoencoder: AutoencoderConfig {
                latent_dim: self.latent_dim,
                learning_rate: self.ae_learning_rate,
                epochs: self.ae_epochs,
                batch_size: self.ae_batch_size,
                optimizer: Optimizer::Adam,
                seed: self.seed,
            },
            kmeans_max_iters: self.kmeans_max_iters,
            kmeans_restarts: self.kmeans_restarts,
            top_n: self.top_n,
        }
    }

    /// Checks that every referenced path exists and values are in range.
    pub fn validate(&self) -> Result<(), CliError> {
        for p in [
            &self.input,
            &self.lexicon,
            &self.sentiment_labels,
            &self.predictions_a,
            &self.predictions_b,
            &self.gold,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                return Err(CliError::Config(format!("{} does not exist", p.display())));
            }
        }
        match self.sentiment.as_str() {
            "lexicon" => {}
            "external" if self.sentiment_labels.is_some() => {}
            "external" => {
                return Err(CliError::Config(
                    "sentiment = \"external\" needs sentiment_labels".into(),
                ))
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown sentiment backend `{other}` (lexicon | external)"
                )))
            }
        }
        self.elimination_mode()?;
        if self.folds < 2 {
            return Err(CliError::Config("folds must be at least 2".into()));
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(CliError::Config(format!(
                "invalid k range {}..={}",
                self.k_min, self.k_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn flat_keys_parse() {
        let c = RunConfig::from_toml("seed = 7\nelimination = \"both\"\nk_min = 6\nk_max = 6\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.elimination_mode().unwrap(), EliminationMode::DropBoth);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("sede = 7").is_err());
    }

    #[test]
    fn missing_paths_fail_validation() {
        let c = RunConfig {
            gold: Some("/nonexistent/gold.csv".into()),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn format_from_extension() {
        let c = RunConfig {
            input: Some("x/posts.jsonl".into()),
            ..RunConfig::default()
        };
        assert_eq!(c.corpus_format().unwrap(), Format::Jsonl);
    }
}
