use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vocab::{
    inject_features, tokenize, TokenSequence, Vocabulary, FEATURE_BAND, FEATURE_BASE, FEATURE_SLOTS,
};
use super::EncoderError;
use crate::corpus::{Corpus, FoldPlan, Label};
use crate::features::{eliminate, extract_features, EliminationMode};
use crate::linalg::{sigmoid, softmax, Matrix};
use crate::rng;
use crate::sentiment::SentimentLabel;

const FORMAT_VERSION: u32 = 1;
const FEATURE_ROWS: usize = FEATURE_SLOTS * FEATURE_BAND as usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Global gradient-norm clipping threshold.
    pub clip_norm: f64,
    /// Parameters start uniform in `(-init_scale, init_scale)`.
    pub init_scale: f64,
    pub min_freq: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            embed_dim: 64,
            hidden_dim: 64,
            learning_rate: 0.01,
            epochs: 10,
            batch_size: 32,
            clip_norm: 5.0,
            init_scale: 0.1,
            min_freq: 1,
            seed: 0,
        }
    }
}

impl EncoderConfig {
    fn validate(&self) -> Result<(), EncoderError> {
        let bad = |m: &str| Err(EncoderError::InvalidConfig(m.to_string()));
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return bad("embedding and hidden dimensions must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

/// Text preprocessing applied before tokenization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderOptions {
    pub inject: bool,
    pub elimination: EliminationMode,
}

/// Embedding table, one LSTM layer and a two-way softmax head.
///
/// Gate rows are stacked as input, forget, output, candidate; every gate
/// reads the concatenation `[x_t; h_{t-1}]`. Logit 0 is Fake, logit 1 Real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// Rows `0..content_bound` for vocabulary ids, then 5000 rows for the
    /// feature-id bands.
    pub embedding: Matrix,
    pub gates: Matrix,
    pub gate_bias: Vec<f64>,
    pub head: Matrix,
    pub head_bias: Vec<f64>,
}

impl LstmParams {
    fn init(rows: usize, config: &EncoderConfig) -> Self {
        let (e, h, s) = (config.embed_dim, config.hidden_dim, config.init_scale);
        let mut rng = rng::seeded(config.seed);
        let embedding = Matrix::uniform(rows, e, s, &mut rng);
        let gates = Matrix::uniform(4 * h, e + h, s, &mut rng);
        let gate_bias = Matrix::uniform(1, 4 * h, s, &mut rng).data;
        let head = Matrix::uniform(2, h, s, &mut rng);
        let head_bias = Matrix::uniform(1, 2, s, &mut rng).data;
        LstmParams {
            embedding,
            gates,
            gate_bias,
            head,
            head_bias,
        }
    }

    fn hidden(&self) -> usize {
        self.head.cols
    }

    fn embed_dim(&self) -> usize {
        self.embedding.cols
    }

    fn is_finite(&self) -> bool {
        self.embedding.is_finite()
            && self.gates.is_finite()
            && self.head.is_finite()
            && self
                .gate_bias
                .iter()
                .chain(&self.head_bias)
                .all(|v| v.is_finite())
    }
}

/// Gradient of the loss; embedding rows are stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: BTreeMap<usize, Vec<f64>>,
    pub gates: Matrix,
    pub gate_bias: Vec<f64>,
    pub head: Matrix,
    pub head_bias: Vec<f64>,
}

impl Gradients {
    fn zeros(p: &LstmParams) -> Self {
        Gradients {
            embedding: BTreeMap::new(),
            gates: Matrix::zeros(p.gates.rows, p.gates.cols),
            gate_bias: vec![0.0; p.gate_bias.len()],
            head: Matrix::zeros(p.head.rows, p.head.cols),
            head_bias: vec![0.0; p.head_bias.len()],
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (row, g) in &other.embedding {
            let dst = self
                .embedding
                .entry(*row)
                .or_insert_with(|| vec![0.0; g.len()]);
            dst.iter_mut().zip(g).for_each(|(d, s)| *d += s);
        }
        let add = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.gates.data, &other.gates.data);
        add(&mut self.gate_bias, &other.gate_bias);
        add(&mut self.head.data, &other.head.data);
        add(&mut self.head_bias, &other.head_bias);
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.embedding
            .values_mut()
            .flat_map(|r| r.iter_mut())
            .chain(self.gates.data.iter_mut())
            .chain(self.gate_bias.iter_mut())
            .chain(self.head.data.iter_mut())
            .chain(self.head_bias.iter_mut())
    }

    fn scale(&mut self, factor: f64) {
        self.values_mut().for_each(|v| *v *= factor);
    }

    pub fn norm(&self) -> f64 {
        let emb = self.embedding.values().flat_map(|r| r.iter());
        emb.chain(&self.gates.data)
            .chain(&self.gate_bias)
            .chain(&self.head.data)
            .chain(&self.head_bias)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Dense gradient in the order of [`EncoderModel::flat_params`].
    pub fn to_flat(&self, params: &LstmParams) -> Vec<f64> {
        let mut emb = vec![0.0; params.embedding.data.len()];
        let cols = params.embedding.cols;
        for (row, g) in &self.embedding {
            emb[row * cols..(row + 1) * cols].copy_from_slice(g);
        }
        emb.into_iter()
            .chain(self.gates.data.iter().copied())
            .chain(self.gate_bias.iter().copied())
            .chain(self.head.data.iter().copied())
            .chain(self.head_bias.iter().copied())
            .collect()
    }
}

struct Step {
    row: usize,
    input: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Softmax probability of Fake.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub format_version: u32,
    pub vocab: Vocabulary,
    pub config: EncoderConfig,
    pub options: EncoderOptions,
    pub params: LstmParams,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Fake => 0,
        Label::Real => 1,
    }
}

impl EncoderModel {
    pub fn new(
        vocab: Vocabulary,
        config: EncoderConfig,
        options: EncoderOptions,
    ) -> Result<Self, EncoderError> {
        config.validate()?;
        let rows = vocab.content_bound() as usize + FEATURE_ROWS;
        let params = LstmParams::init(rows, &config);
        Ok(EncoderModel {
            format_version: FORMAT_VERSION,
            vocab,
            config,
            options,
            params,
            loss_history: Vec::new(),
        })
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }

    /// Embedding row for a token id; feature ids get rows after the vocabulary.
    pub fn row_of(&self, id: u32) -> Result<usize, EncoderError> {
        let bound = self.vocab.content_bound();
        if id < bound {
            Ok(id as usize)
        } else if (FEATURE_BASE..FEATURE_BASE + FEATURE_ROWS as u32).contains(&id) {
            Ok(bound as usize + (id - FEATURE_BASE) as usize)
        } else {
            Err(EncoderError::IdOutOfRange(id))
        }
    }

    fn rows(&self, seq: &TokenSequence) -> Result<Vec<usize>, EncoderError> {
        seq.ids.iter().map(|&id| self.row_of(id)).collect()
    }

    /// Applies the model's elimination and injection settings to raw text.
    pub fn encode(
        &self,
        text: &str,
        sentiment: Option<SentimentLabel>,
    ) -> Result<TokenSequence, EncoderError> {
        let cleaned = eliminate(text, self.options.elimination);
        let seq = tokenize(&cleaned, &self.vocab);
        if !self.options.inject {
            return Ok(seq);
        }
        let sentiment = sentiment.ok_or(EncoderError::MissingSentiment)?;
        inject_features(&seq, &extract_features(&cleaned, sentiment))
    }

    fn forward(&self, rows: &[usize]) -> (Vec<Step>, Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let (e, h) = (p.embed_dim(), p.hidden());
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let mut pre = vec![0.0; 4 * h];
        let mut steps = Vec::with_capacity(rows.len());
        for &row in rows {
            let mut input = Vec::with_capacity(e + h);
            input.extend_from_slice(p.embedding.row(row));
            input.extend_from_slice(&h_prev);
            p.gates.affine(&input, &p.gate_bias, &mut pre);
            let i: Vec<f64> = pre[..h].iter().map(|&a| sigmoid(a)).collect();
            let f: Vec<f64> = pre[h..2 * h].iter().map(|&a| sigmoid(a)).collect();
            let o: Vec<f64> = pre[2 * h..3 * h].iter().map(|&a| sigmoid(a)).collect();
            let g: Vec<f64> = pre[3 * h..].iter().map(|&a| a.tanh()).collect();
            let c: Vec<f64> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            h_prev = (0..h).map(|k| o[k] * tanh_c[k]).collect();
            steps.push(Step {
                row,
                input,
                i,
                f,
                o,
                g,
                c_prev: std::mem::replace(&mut c_prev, c),
                tanh_c,
            });
        }
        let mut logits = vec![0.0; 2];
        p.head.affine(&h_prev, &p.head_bias, &mut logits);
        (steps, h_prev, logits)
    }

    fn backward(&self, rows: &[usize], label: Label) -> (f64, Gradients) {
        let p = &self.params;
        let (e, h) = (p.embed_dim(), p.hidden());
        let (steps, h_last, logits) = self.forward(rows);
        let probs = softmax(&logits);
        let target = class_index(label);
        let loss = -probs[target].max(f64::MIN_POSITIVE).ln();

        let mut grads = Gradients::zeros(p);
        let mut dlogits = probs;
        dlogits[target] -= 1.0;
        grads.head.add_outer(&dlogits, &h_last, 1.0);
        grads.head_bias.copy_from_slice(&dlogits);
        let mut dh = vec![0.0; h];
        p.head.add_transposed_mul(&dlogits, &mut dh);
        let mut dc = vec![0.0; h];
        let mut dpre = vec![0.0; 4 * h];
        for step in steps.iter().rev() {
            for k in 0..h {
                let (i, f, o, g, tc) = (step.i[k], step.f[k], step.o[k], step.g[k], step.tanh_c[k]);
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                dpre[k] = dc[k] * g * i * (1.0 - i);
                dpre[h + k] = dc[k] * step.c_prev[k] * f * (1.0 - f);
                dpre[2 * h + k] = d_o * o * (1.0 - o);
                dpre[3 * h + k] = dc[k] * i * (1.0 - g * g);
                dc[k] *= f;
            }
            grads.gates.add_outer(&dpre, &step.input, 1.0);
            grads
                .gate_bias
                .iter_mut()
                .zip(&dpre)
                .for_each(|(b, d)| *b += d);
            let mut dinput = vec![0.0; e + h];
            p.gates.add_transposed_mul(&dpre, &mut dinput);
            let row = grads
                .embedding
                .entry(step.row)
                .or_insert_with(|| vec![0.0; e]);
            row.iter_mut().zip(&dinput[..e]).for_each(|(r, d)| *r += d);
            dh.copy_from_slice(&dinput[e..]);
        }
        (loss, grads)
    }

    /// Cross-entropy loss of one sequence and its gradient.
    pub fn loss_and_gradients(
        &self,
        seq: &TokenSequence,
        label: Label,
    ) -> Result<(f64, Gradients), EncoderError> {
        let rows = self.rows(seq)?;
        Ok(self.backward(&rows, label))
    }

    pub fn loss(&self, seq: &TokenSequence, label: Label) -> Result<f64, EncoderError> {
        let rows = self.rows(seq)?;
        let (_, _, logits) = self.forward(&rows);
        Ok(-softmax(&logits)[class_index(label)].ln())
    }

    /// Class probabilities `[fake, real]`.
    pub fn probabilities(&self, seq: &TokenSequence) -> Result<Vec<f64>, EncoderError> {
        let rows = self.rows(seq)?;
        Ok(softmax(&self.forward(&rows).2))
    }

    /// Argmax of the softmax; an exact tie goes to Real.
    pub fn predict(&self, seq: &TokenSequence) -> Result<Prediction, EncoderError> {
        let probs = self.probabilities(seq)?;
        let label = if probs[0] > probs[1] {
            Label::Fake
        } else {
            Label::Real
        };
        Ok(Prediction {
            label,
            score: probs[0],
        })
    }

    /// Mean of the embedding rows of the text's content tokens (zeros when
    /// the text has none).
    pub fn sentence_embedding(&self, text: &str) -> Vec<f64> {
        let e = self.params.embed_dim();
        let seq = tokenize(text, &self.vocab);
        let content = seq.content();
        let mut out = vec![0.0; e];
        if content.is_empty() {
            return out;
        }
        for &id in content {
            let row = self.params.embedding.row(id as usize);
            out.iter_mut().zip(row).for_each(|(o, r)| *o += r);
        }
        let n = content.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    /// Mini-batch SGD with global-norm clipping. Examples of a batch are
    /// evaluated in parallel and reduced in input order, so results do not
    /// depend on the thread count.
    pub fn fit(&mut self, seqs: &[TokenSequence], labels: &[Label]) -> Result<(), EncoderError> {
        if seqs.is_empty() {
            return Err(EncoderError::EmptyTrainingSet);
        }
        assert_eq!(seqs.len(), labels.len(), "sequences and labels must align");
        let rows: Vec<Vec<usize>> = seqs
            .iter()
            .map(|s| self.rows(s))
            .collect::<Result<_, _>>()?;
        let mut rng = rng::seeded(self.config.seed.wrapping_add(1));
        let mut order: Vec<usize> = (0..seqs.len()).collect();
        let lr = self.config.learning_rate;
        for epoch in 0..self.config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(self.config.batch_size) {
                let model = &*self;
                let parts: Vec<(f64, Gradients)> = batch
                    .par_iter()
                    .map(|&i| model.backward(&rows[i], labels[i]))
                    .collect();
                let mut total = Gradients::zeros(&self.params);
                for (loss, g) in &parts {
                    epoch_loss += loss;
                    total.accumulate(g);
                }
                total.scale(1.0 / batch.len() as f64);
                let norm = total.norm();
                if !norm.is_finite() {
                    return Err(EncoderError::Divergence { epoch: epoch + 1 });
                }
                if norm > self.config.clip_norm {
                    total.scale(self.config.clip_norm / norm);
                }
                self.apply(&total, lr);
            }
            let mean = epoch_loss / seqs.len() as f64;
            if !mean.is_finite() || !self.params.is_finite() {
                return Err(EncoderError::Divergence { epoch: epoch + 1 });
            }
            self.loss_history.push(mean);
        }
        Ok(())
    }

    fn apply(&mut self, g: &Gradients, lr: f64) {
        let p = &mut self.params;
        for (&row, grad) in &g.embedding {
            p.embedding
                .row_mut(row)
                .iter_mut()
                .zip(grad)
                .for_each(|(w, d)| *w -= lr * d);
        }
        let step = |w: &mut [f64], d: &[f64]| w.iter_mut().zip(d).for_each(|(w, d)| *w -= lr * d);
        step(&mut p.gates.data, &g.gates.data);
        step(&mut p.gate_bias, &g.gate_bias);
        step(&mut p.head.data, &g.head.data);
        step(&mut p.head_bias, &g.head_bias);
    }

    /// All parameters flattened: embedding, gates, gate bias, head, head bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let p = &self.params;
        p.embedding
            .data
            .iter()
            .chain(&p.gates.data)
            .chain(&p.gate_bias)
            .chain(&p.head.data)
            .chain(&p.head_bias)
            .copied()
            .collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) {
        let p = &mut self.params;
        let slots = p
            .embedding
            .data
            .iter_mut()
            .chain(p.gates.data.iter_mut())
            .chain(p.gate_bias.iter_mut())
            .chain(p.head.data.iter_mut())
            .chain(p.head_bias.iter_mut());
        let mut n = 0;
        for (slot, &v) in slots.zip(values) {
            *slot = v;
            n += 1;
        }
        assert_eq!(n, values.len(), "parameter count mismatch");
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, EncoderError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), EncoderError> {
        std::fs::write(path, self.to_json()).map_err(|source| EncoderError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, EncoderError> {
        let s = std::fs::read_to_string(path).map_err(|source| EncoderError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&s)
    }
}

/// Trains on the posts at `train_idx`. The vocabulary is built from those
/// posts only (after elimination).
pub fn train_encoder(
    corpus: &Corpus,
    sentiments: Option<&[SentimentLabel]>,
    train_idx: &[usize],
    config: &EncoderConfig,
    options: EncoderOptions,
) -> Result<EncoderModel, EncoderError> {
    if train_idx.is_empty() {
        return Err(EncoderError::EmptyTrainingSet);
    }
    if let Some(s) = sentiments {
        if s.len() != corpus.len() {
            return Err(EncoderError::MissingSentiment);
        }
    } else if options.inject {
        return Err(EncoderError::MissingSentiment);
    }
    let posts = corpus.posts();
    let cleaned: Vec<String> = train_idx
        .iter()
        .map(|&i| eliminate(&posts[i].text, options.elimination))
        .collect();
    let vocab = Vocabulary::build(cleaned.iter().map(String::as_str), config.min_freq)?;
    let mut model = EncoderModel::new(vocab, config.clone(), options)?;
    let seqs = train_idx
        .iter()
        .map(|&i| model.encode(&posts[i].text, sentiments.map(|s| s[i])))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<Label> = train_idx.iter().map(|&i| posts[i].label).collect();
    model.fit(&seqs, &labels)?;
    Ok(model)
}

/// Trains on every fold except `held_out`.
pub fn train_encoder_fold(
    corpus: &Corpus,
    sentiments: Option<&[SentimentLabel]>,
    folds: &FoldPlan,
    held_out: usize,
    config: &EncoderConfig,
    options: EncoderOptions,
) -> Result<EncoderModel, EncoderError> {
    let (train, _) = folds.split(corpus, held_out)?;
    train_encoder(corpus, sentiments, &train, config, options)
}
