use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use infodemic::corpus::{
    corpus_stats, default_label_table, load_corpus, make_folds, Corpus, CorpusStats, FoldPlan,
    Label,
};
use infodemic::encoder::{
    train_encoder, EncoderConfig, EncoderError, EncoderModel, EncoderOptions, Vocabulary,
};
use infodemic::features::{exclusive_tags, extract_features, tag_frequency, TagKind};
use infodemic::models::{
    agreement_ensemble, cross_validate, train_svm, BoxError, EnsembleReport, FoldReport,
    LabeledData, SvmConfig, SvmModel, Trainer,
};
use infodemic::report::{tag_table_csv, tag_table_svg, word_weights_csv};
use infodemic::sentiment::{
    classify_corpus, concern_index, concern_significance, load_external_labels, ConcernReport,
    Lexicon, Rounding, SentimentDistribution, SentimentLabel, SignificanceResult,
};
use infodemic::topics::{
    preprocess_topic_text, select_k, topic_similarity, KScore, PreprocessConfig, TopicReport,
};
use infodemic::{BehavioralFeatures, EliminationMode};

use crate::config::RunConfig;
use crate::output::OutputDir;
use crate::{CliError, StageExt};

#[derive(Debug, Clone, Serialize)]
struct PerLabel<T> {
    fake: T,
    real: T,
}

fn label_name(label: Label) -> &'static str {
    label.as_str()
}

fn load(cfg: &RunConfig) -> Result<Corpus, CliError> {
    load_corpus(cfg.input_path()?, cfg.corpus_format()?, &cfg.schema()).stage("load")
}

fn sentiments(cfg: &RunConfig, corpus: &Corpus) -> Result<Vec<SentimentLabel>, CliError> {
    if cfg.sentiment == "external" {
        let path = cfg.sentiment_labels.as_deref().expect("validated");
        let labels = load_external_labels(path).stage("sentiment")?;
        return classify_corpus(corpus, &labels).stage("sentiment");
    }
    let lexicon = match &cfg.lexicon {
        Some(p) => Lexicon::load(p).stage("sentiment")?,
        None => Lexicon::builtin(),
    };
    classify_corpus(corpus, &lexicon).stage("sentiment")
}

fn features(corpus: &Corpus, sents: &[SentimentLabel]) -> Vec<BehavioralFeatures> {
    corpus
        .posts()
        .iter()
        .zip(sents)
        .map(|(p, &s)| extract_features(&p.text, s))
        .collect()
}

fn distributions(corpus: &Corpus, sents: &[SentimentLabel]) -> PerLabel<SentimentDistribution> {
    let mut fake = SentimentDistribution::default();
    let mut real = SentimentDistribution::default();
    for (post, &s) in corpus.posts().iter().zip(sents) {
        match post.label {
            Label::Fake => fake.add(s),
            Label::Real => real.add(s),
        }
    }
    PerLabel { fake, real }
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    corpus: &'a str,
    stats: CorpusStats,
    sentiment: PerLabel<SentimentDistribution>,
}

pub fn stats(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let corpus = out.timed("load", |_| load(cfg))?;
    let sents = out.timed("sentiment", |_| sentiments(cfg, &corpus))?;
    let feats = features(&corpus, &sents);
    let stats = corpus_stats(&corpus, &feats).stage("stats")?;
    out.write_json(
        "stats.json",
        &StatsOutput {
            corpus: corpus.name(),
            stats,
            sentiment: distributions(&corpus, &sents),
        },
    )?;
    let top = cfg.top_tags;
    out.timed("tags", |out| {
        for kind in [TagKind::Hashtag, TagKind::Mention] {
            for label in Label::ALL {
                let table = tag_frequency(&corpus, kind, Some(label), top);
                let stem = format!("{}_{}_top{top}", kind.plural(), label_name(label));
                let title = format!("Top {top} {} in {} news", kind.plural(), label_name(label));
                out.write(&format!("{stem}.csv"), &tag_table_csv(&table))?;
                out.write(&format!("{stem}.svg"), &tag_table_svg(&title, &table))?;
            }
        }
        for label in Label::ALL {
            let table = exclusive_tags(&corpus, TagKind::Hashtag, label, top);
            let stem = format!("hashtags_{}_only", label_name(label));
            let title = format!("Hashtags occurring only in {} news", label_name(label));
            out.write(&format!("{stem}.csv"), &tag_table_csv(&table))?;
            out.write(&format!("{stem}.svg"), &tag_table_svg(&title, &table))?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct ClassConcern {
    distribution: SentimentDistribution,
    concern: ConcernReport,
}

#[derive(Serialize)]
struct ConcernOutput<'a> {
    corpus: &'a str,
    fake: ClassConcern,
    real: ClassConcern,
    full_precision: SignificanceResult,
    two_decimal: SignificanceResult,
}

pub fn concern(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let corpus = out.timed("load", |_| load(cfg))?;
    let sents = out.timed("sentiment", |_| sentiments(cfg, &corpus))?;
    let d = distributions(&corpus, &sents);
    let report = ConcernOutput {
        corpus: corpus.name(),
        full_precision: concern_significance(&d.fake, &d.real, Rounding::FullPrecision)
            .stage("significance")?,
        two_decimal: concern_significance(&d.fake, &d.real, Rounding::TwoDecimal)
            .stage("significance")?,
        fake: ClassConcern {
            concern: concern_index(&d.fake),
            distribution: d.fake,
        },
        real: ClassConcern {
            concern: concern_index(&d.real),
            distribution: d.real,
        },
    };
    out.write_json("concern.json", &report)
}

#[derive(Serialize)]
struct TopicsOutput<'a> {
    label: &'a str,
    best_k: usize,
    coherence_by_k: &'a [KScore],
    report: &'a TopicReport,
}

#[derive(Serialize)]
struct SimilarityOutput {
    top_n: usize,
    threshold: f64,
    fake_k: usize,
    real_k: usize,
    /// Rows are fake-news clusters, columns real-news clusters.
    values: Vec<Vec<f64>>,
    overlapping: Vec<Vec<bool>>,
    fake_topics_overlapping: usize,
}

/// Per-post sentence embeddings. With both labels present an encoder is
/// trained on the whole corpus; otherwise the seeded initial embeddings are
/// used.
fn embeddings(cfg: &RunConfig, corpus: &Corpus) -> Result<Vec<Vec<f64>>, CliError> {
    let enc_cfg = cfg.encoder_config();
    let model = if corpus.count(Label::Fake) > 0 && corpus.count(Label::Real) > 0 {
        let all: Vec<usize> = (0..corpus.len()).collect();
        train_encoder(corpus, None, &all, &enc_cfg, EncoderOptions::default())
    } else {
        Vocabulary::build(
            corpus.posts().iter().map(|p| p.text.as_str()),
            enc_cfg.min_freq,
        )
        .and_then(|v| EncoderModel::new(v, enc_cfg, EncoderOptions::default()))
    }
    .stage("embeddings")?;
    Ok(corpus
        .posts()
        .iter()
        .map(|p| model.sentence_embedding(&p.text))
        .collect())
}

pub fn topics(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let corpus = out.timed("load", |_| load(cfg))?;
    let pre = PreprocessConfig::default();
    let docs: Vec<Vec<String>> = corpus
        .posts()
        .iter()
        .map(|p| preprocess_topic_text(&p.text, &pre))
        .collect();
    let embs = out.timed("embeddings", |_| embeddings(cfg, &corpus))?;
    let pipeline = cfg.pipeline_config();
    let mut reports: BTreeMap<Label, TopicReport> = BTreeMap::new();
    for label in Label::ALL {
        let idx = corpus.indices_of(label);
        if idx.is_empty() {
            continue;
        }
        let name = label_name(label);
        let class_docs: Vec<Vec<String>> = idx.iter().map(|&i| docs[i].clone()).collect();
        let class_embs: Vec<Vec<f64>> = idx.iter().map(|&i| embs[i].clone()).collect();
        let selection = out.timed(&format!("topics_{name}"), |_| {
            select_k(
                &class_docs,
                &class_embs,
                cfg.k_min..=cfg.k_max,
                &pipeline,
                cfg.seed,
            )
            .stage(&format!("topics/{name}"))
        })?;
        out.write_json(
            &format!("topics_{name}.json"),
            &TopicsOutput {
                label: name,
                best_k: selection.best_k,
                coherence_by_k: &selection.table,
                report: &selection.report,
            },
        )?;
        for c in &selection.report.clusters {
            out.write(
                &format!("topics_{name}_cluster{}.csv", c.cluster),
                &word_weights_csv(&c.words),
            )?;
        }
        reports.insert(label, selection.report);
    }
    if let (Some(fake), Some(real)) = (reports.get(&Label::Fake), reports.get(&Label::Real)) {
        let sim = topic_similarity(fake, real, cfg.top_n).stage("similarity")?;
        let overlapping: Vec<Vec<bool>> = sim
            .values
            .iter()
            .map(|row| row.iter().map(|&v| v >= cfg.similarity_threshold).collect())
            .collect();
        out.write_json(
            "similarity.json",
            &SimilarityOutput {
                top_n: cfg.top_n,
                threshold: cfg.similarity_threshold,
                fake_k: fake.k,
                real_k: real.k,
                fake_topics_overlapping: overlapping.iter().filter(|r| r.contains(&true)).count(),
                values: sim.values,
                overlapping,
            },
        )?;
    }
    Ok(())
}

struct EncoderTrainer<'a> {
    config: EncoderConfig,
    options: EncoderOptions,
    sentiments: &'a [SentimentLabel],
}

impl Trainer<Corpus> for EncoderTrainer<'_> {
    type Model = EncoderModel;

    fn train(
        &self,
        corpus: &Corpus,
        rows: &[usize],
        fold: usize,
    ) -> Result<EncoderModel, BoxError> {
        let config = EncoderConfig {
            seed: self.config.seed.wrapping_add(fold as u64),
            ..self.config.clone()
        };
        Ok(train_encoder(
            corpus,
            Some(self.sentiments),
            rows,
            &config,
            self.options,
        )?)
    }

    fn predict(
        &self,
        model: &EncoderModel,
        corpus: &Corpus,
        rows: &[usize],
    ) -> Result<Vec<Label>, BoxError> {
        rows.iter()
            .map(|&i| {
                let seq = model.encode(&corpus.posts()[i].text, Some(self.sentiments[i]))?;
                Ok::<_, EncoderError>(model.predict(&seq)?.label)
            })
            .collect::<Result<_, _>>()
            .map_err(Into::into)
    }
}

struct FeatureData {
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl LabeledData for FeatureData {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn label(&self, i: usize) -> Label {
        self.labels[i]
    }
}

struct SvmTrainer {
    config: SvmConfig,
}

impl Trainer<FeatureData> for SvmTrainer {
    type Model = SvmModel;

    fn train(&self, data: &FeatureData, rows: &[usize], fold: usize) -> Result<SvmModel, BoxError> {
        let x: Vec<Vec<f64>> = rows.iter().map(|&i| data.rows[i].clone()).collect();
        let y: Vec<Label> = rows.iter().map(|&i| data.labels[i]).collect();
        let config = SvmConfig {
            seed: self.config.seed.wrapping_add(fold as u64),
            ..self.config.clone()
        };
        Ok(train_svm(&x, &y, &config)?)
    }

    fn predict(
        &self,
        model: &SvmModel,
        data: &FeatureData,
        rows: &[usize],
    ) -> Result<Vec<Label>, BoxError> {
        rows.iter()
            .map(|&i| model.predict(&data.rows[i]).map_err(Into::into))
            .collect()
    }
}

#[derive(Serialize)]
struct CvOutput<'a, C: Serialize> {
    model: &'a str,
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    options: Option<OptionsOut>,
    folds: &'a [FoldReport],
    mean_accuracy: f64,
}

#[derive(Serialize, Clone, Copy)]
struct OptionsOut {
    inject: bool,
    elimination: &'static str,
}

impl From<EncoderOptions> for OptionsOut {
    fn from(o: EncoderOptions) -> Self {
        OptionsOut {
            inject: o.inject,
            elimination: o.elimination.as_str(),
        }
    }
}

#[derive(Serialize)]
struct EnsembleOutput<'a> {
    model_a: &'a str,
    model_b: &'a str,
    #[serde(flatten)]
    report: EnsembleReport,
}

#[derive(Serialize)]
struct SweepRow {
    elimination: &'static str,
    inject: bool,
    mean_accuracy: f64,
    fold_accuracies: Vec<f64>,
}

#[derive(Serialize)]
struct SweepOutput {
    rows: Vec<SweepRow>,
}

fn predictions_csv(
    corpus: &Corpus,
    fold_of: &[usize],
    preds: &[Label],
) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(["id", "label", "fold"]).map_err(io)?;
    for ((post, fold), label) in corpus.posts().iter().zip(fold_of).zip(preds) {
        w.write_record([post.id.as_str(), label.as_str(), &fold.to_string()])
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn train_eval(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let corpus = out.timed("load", |_| load(cfg))?;
    let sents = out.timed("sentiment", |_| sentiments(cfg, &corpus))?;
    let feats = features(&corpus, &sents);
    let plan: FoldPlan = make_folds(&corpus, cfg.folds, cfg.seed).stage("folds")?;
    out.write_json("folds.json", &plan)?;
    let fold_of = plan.fold_vector(&corpus).stage("folds")?;
    let gold = corpus.labels();

    let enc_config = cfg.encoder_config();
    let options = cfg.encoder_options()?;
    let enc = EncoderTrainer {
        config: enc_config.clone(),
        options,
        sentiments: &sents,
    };
    let enc_cv = out.timed("encoder_cv", |_| {
        cross_validate(&enc, &corpus, &fold_of, cfg.folds).stage("encoder_cv")
    })?;
    out.write_json(
        "encoder_cv.json",
        &CvOutput {
            model: "encoder",
            config: &enc_config,
            options: Some(options.into()),
            folds: &enc_cv.folds,
            mean_accuracy: enc_cv.mean_accuracy,
        },
    )?;
    out.write(
        "predictions_encoder.csv",
        &predictions_csv(&corpus, &fold_of, &enc_cv.out_of_fold)?,
    )?;

    let svm_config = cfg.svm_config();
    let data = FeatureData {
        rows: feats.iter().map(BehavioralFeatures::to_vector).collect(),
        labels: gold.clone(),
    };
    let svm = SvmTrainer {
        config: svm_config.clone(),
    };
    let svm_cv = out.timed("svm_cv", |_| {
        cross_validate(&svm, &data, &fold_of, cfg.folds).stage("svm_cv")
    })?;
    out.write_json(
        "svm_cv.json",
        &CvOutput {
            model: "svm",
            config: &svm_config,
            options: None,
            folds: &svm_cv.folds,
            mean_accuracy: svm_cv.mean_accuracy,
        },
    )?;
    out.write(
        "predictions_svm.csv",
        &predictions_csv(&corpus, &fold_of, &svm_cv.out_of_fold)?,
    )?;

    let ens =
        agreement_ensemble(&enc_cv.out_of_fold, &svm_cv.out_of_fold, &gold).stage("ensemble")?;
    out.write_json(
        "ensemble.json",
        &EnsembleOutput {
            model_a: "encoder",
            model_b: "svm",
            report: ens,
        },
    )?;

    if cfg.sweep {
        let rows = out.timed("sweep", |_| {
            EliminationMode::ALL
                .iter()
                .map(|&mode| {
                    let trainer = EncoderTrainer {
                        config: enc_config.clone(),
                        options: EncoderOptions {
                            inject: cfg.inject,
                            elimination: mode,
                        },
                        sentiments: &sents,
                    };
                    let cv = cross_validate(&trainer, &corpus, &fold_of, cfg.folds)
                        .stage(&format!("sweep/{}", mode.as_str()))?;
                    Ok(SweepRow {
                        elimination: mode.as_str(),
                        inject: cfg.inject,
                        mean_accuracy: cv.mean_accuracy,
                        fold_accuracies: cv.folds.iter().map(|f| f.report.accuracy).collect(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })?;
        out.write_json("sweep.json", &SweepOutput { rows })?;
    }

    out.timed("final_models", |out| {
        let all: Vec<usize> = (0..corpus.len()).collect();
        let model = enc
            .train(&corpus, &all, 0)
            .map_err(|source| CliError::Stage {
                stage: "final_encoder".into(),
                source,
            })?;
        out.write("vocab.tsv", &model.vocab.export_tsv())?;
        out.write_json_compact("encoder_model.json", &model)?;
        let svm_model = svm
            .train(&data, &all, 0)
            .map_err(|source| CliError::Stage {
                stage: "final_svm".into(),
                source,
            })?;
        out.write_json_compact("svm_model.json", &svm_model)
    })
}

fn read_labels(path: &Path) -> Result<Vec<(String, Label)>, CliError> {
    let table = default_label_table();
    let stage = format!("read {}", path.display());
    let mut reader = csv::Reader::from_path(path).stage(&stage)?;
    let headers = reader.headers().stage(&stage)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let (id_col, label_col) = (col("id").unwrap_or(0), col("label").unwrap_or(1));
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.stage(&stage)?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        let raw = rec.get(label_col).unwrap_or("").trim().to_lowercase();
        let label = *table.get(&raw).ok_or_else(|| {
            CliError::Config(format!(
                "{}: row {}: unknown label `{raw}`",
                path.display(),
                i + 1
            ))
        })?;
        rows.push((id, label));
    }
    Ok(rows)
}

pub fn ensemble(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let need = |p: &Option<std::path::PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| CliError::Config(format!("ensemble needs {flag}")))
    };
    let a_path = need(&cfg.predictions_a, "--preds-a")?;
    let b_path = need(&cfg.predictions_b, "--preds-b")?;
    let gold: Vec<(String, Label)> = match &cfg.gold {
        Some(p) => read_labels(p)?,
        None => load(cfg)?
            .posts()
            .iter()
            .map(|p| (p.id.clone(), p.label))
            .collect(),
    };
    let index =
        |rows: Vec<(String, Label)>, path: &Path| -> Result<BTreeMap<String, Label>, CliError> {
            let mut map = BTreeMap::new();
            for (id, l) in rows {
                if map.insert(id.clone(), l).is_some() {
                    return Err(CliError::Config(format!(
                        "{}: duplicate id `{id}`",
                        path.display()
                    )));
                }
            }
            Ok(map)
        };
    let a = index(read_labels(&a_path)?, &a_path)?;
    let b = index(read_labels(&b_path)?, &b_path)?;
    let lookup = |map: &BTreeMap<String, Label>, id: &str, path: &Path| {
        map.get(id).copied().ok_or_else(|| {
            CliError::Config(format!("{}: no prediction for id `{id}`", path.display()))
        })
    };
    let mut pa = Vec::with_capacity(gold.len());
    let mut pb = Vec::with_capacity(gold.len());
    for (id, _) in &gold {
        pa.push(lookup(&a, id, &a_path)?);
        pb.push(lookup(&b, id, &b_path)?);
    }
    let g: Vec<Label> = gold.iter().map(|(_, l)| *l).collect();
    let report = agreement_ensemble(&pa, &pb, &g).stage("ensemble")?;
    out.write_json(
        "ensemble.json",
        &EnsembleOutput {
            model_a: "a",
            model_b: "b",
            report,
        },
    )
}
