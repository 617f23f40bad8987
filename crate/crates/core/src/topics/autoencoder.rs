//! One-hidden-layer autoencoder: `z = tanh(W_e x + b_e)`, `x̂ = W_d z + b_d`,
//! trained on mean squared reconstruction error.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            latent_dim: 32,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            optimizer: Optimizer::Adam,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub input_dim: usize,
    pub latent_dim: usize,
    pub enc_w: Matrix,
    pub enc_b: Vec<f64>,
    pub dec_w: Matrix,
    pub dec_b: Vec<f64>,
    pub config: AutoencoderConfig,
    /// Full-data reconstruction MSE after each epoch.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeGradients {
    pub enc_w: Matrix,
    pub enc_b: Vec<f64>,
    pub dec_w: Matrix,
    pub dec_b: Vec<f64>,
}

impl AeGradients {
    /// Same order as [`AutoencoderModel::flat_params`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.enc_w
            .data
            .iter()
            .chain(&self.enc_b)
            .chain(&self.dec_w.data)
            .chain(&self.dec_b)
            .copied()
            .collect()
    }
}

impl AutoencoderModel {
    /// Uniform init in `±1/√fan_in`.
    pub fn new(input_dim: usize, config: AutoencoderConfig) -> Result<Self, TopicError> {
        let latent = config.latent_dim;
        if latent == 0 || latent >= input_dim {
            return Err(TopicError::LatentTooLarge {
                latent,
                input: input_dim,
            });
        }
        let mut rng = rng::seeded(config.seed);
        let enc_scale = 1.0 / (input_dim as f64).sqrt();
        let dec_scale = 1.0 / (latent as f64).sqrt();
        Ok(AutoencoderModel {
            input_dim,
            latent_dim: latent,
            enc_w: Matrix::uniform(latent, input_dim, enc_scale, &mut rng),
            enc_b: vec![0.0; latent],
            dec_w: Matrix::uniform(input_dim, latent, dec_scale, &mut rng),
            dec_b: vec![0.0; input_dim],
            config,
            loss_history: Vec::new(),
        })
    }

    fn check(&self, x: &[f64]) -> Result<(), TopicError> {
        if x.len() != self.input_dim {
            return Err(TopicError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn latent(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.latent_dim];
        self.enc_w.affine(x, &self.enc_b, &mut z);
        z.iter_mut().for_each(|v| *v = v.tanh());
        z
    }

    fn decode(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_dim];
        self.dec_w.affine(z, &self.dec_b, &mut out);
        out
    }

    pub fn encode_latent(&self, x: &[f64]) -> Result<Vec<f64>, TopicError> {
        self.check(x)?;
        Ok(self.latent(x))
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>, TopicError> {
        self.check(x)?;
        Ok(self.decode(&self.latent(x)))
    }

    /// Mean over all `n · D` squared reconstruction errors.
    pub fn loss(&self, data: &[Vec<f64>]) -> f64 {
        let mut sum = 0.0;
        for x in data {
            let xh = self.decode(&self.latent(x));
            sum += xh
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        sum / (data.len() * self.input_dim).max(1) as f64
    }

    pub fn loss_and_gradients(&self, data: &[Vec<f64>]) -> (f64, AeGradients) {
        let (d, l) = (self.input_dim, self.latent_dim);
        let mut g = AeGradients {
            enc_w: Matrix::zeros(l, d),
            enc_b: vec![0.0; l],
            dec_w: Matrix::zeros(d, l),
            dec_b: vec![0.0; d],
        };
        let scale = 1.0 / (data.len() * d).max(1) as f64;
        let mut loss = 0.0;
        for x in data {
            let z = self.latent(x);
            let xh = self.decode(&z);
            let dout: Vec<f64> = xh
                .iter()
                .zip(x)
                .map(|(a, b)| {
                    loss += (a - b) * (a - b);
                    2.0 * (a - b) * scale
                })
                .collect();
            g.dec_w.add_outer(&dout, &z, 1.0);
            g.dec_b.iter_mut().zip(&dout).for_each(|(b, v)| *b += v);
            let mut dz = vec![0.0; l];
            self.dec_w.add_transposed_mul(&dout, &mut dz);
            let dpre: Vec<f64> = dz.iter().zip(&z).map(|(g, z)| g * (1.0 - z * z)).collect();
            g.enc_w.add_outer(&dpre, x, 1.0);
            g.enc_b.iter_mut().zip(&dpre).for_each(|(b, v)| *b += v);
        }
        (loss * scale, g)
    }

    /// Encoder weights, encoder bias, decoder weights, decoder bias.
    pub fn flat_params(&self) -> Vec<f64> {
        self.enc_w
            .data
            .iter()
            .chain(&self.enc_b)
            .chain(&self.dec_w.data)
            .chain(&self.dec_b)
            .copied()
            .collect()
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.enc_w
            .data
            .iter_mut()
            .chain(self.enc_b.iter_mut())
            .chain(self.dec_w.data.iter_mut())
            .chain(self.dec_b.iter_mut())
    }

    pub fn set_flat_params(&mut self, values: &[f64]) {
        let mut n = 0;
        for (p, &v) in self.params_mut().zip(values) {
            *p = v;
            n += 1;
        }
        assert_eq!(n, values.len(), "parameter count mismatch");
    }

    /// Mini-batch training from the current parameters.
    pub fn fit(&mut self, data: &[Vec<f64>]) -> Result<(), TopicError> {
        if data.len() < 2 {
            return Err(TopicError::TooFewVectors(data.len()));
        }
        for x in data {
            self.check(x)?;
        }
        let cfg = self.config.clone();
        let mut rng = rng::seeded(cfg.seed.wrapping_add(1));
        let mut order: Vec<usize> = (0..data.len()).collect();
        let n_params = self.flat_params().len();
        let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let mut step = 0i32;
        let mut batch = Vec::with_capacity(cfg.batch_size.max(1));
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| data[i].clone()));
                let (_, g) = self.loss_and_gradients(&batch);
                let grad = g.to_flat();
                let lr = cfg.learning_rate;
                match cfg.optimizer {
                    Optimizer::Sgd => {
                        for (p, g) in self.params_mut().zip(&grad) {
                            *p -= lr * g;
                        }
                    }
                    Optimizer::Adam => {
                        step += 1;
                        let c1 = 1.0 - b1.powi(step);
                        let c2 = 1.0 - b2.powi(step);
                        for (i, p) in self.params_mut().enumerate() {
                            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
                            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
                            *p -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                        }
                    }
                }
            }
            let loss = self.loss(data);
            if !loss.is_finite() {
                return Err(TopicError::Divergence { epoch: epoch + 1 });
            }
            self.loss_history.push(loss);
        }
        Ok(())
    }
}

pub fn train_autoencoder(
    vectors: &[Vec<f64>],
    config: &AutoencoderConfig,
) -> Result<AutoencoderModel, TopicError> {
    if vectors.len() < 2 {
        return Err(TopicError::TooFewVectors(vectors.len()));
    }
    let mut model = AutoencoderModel::new(vectors[0].len(), config.clone())?;
    model.fit(vectors)?;
    Ok(model)
}
