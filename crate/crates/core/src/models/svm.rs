//! Soft-margin SVM with an RBF kernel, trained by Platt's SMO.
//!
//! Decision function: `f(x) = Σ αᵢ yᵢ K(xᵢ, x) + b` with
//! `K(u, v) = exp(-γ‖u − v‖²)`, evaluated on standardized inputs.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::linalg::squared_distance;
use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("training data needs at least one example of each class")]
    SingleClass,
    #[error("C must be positive, got {0}")]
    InvalidC(f64),
    #[error("gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("expected {expected}-dimensional input, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// One over the number of features.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: GammaMode,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1000.0,
            gamma: GammaMode::Auto,
            tol: 1e-3,
            max_passes: 100,
            seed: 0,
        }
    }
}

/// Per-feature z-scoring; constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; d];
        for r in rows {
            for (j, v) in r.iter().enumerate() {
                std[j] += (v - mean[j]) * (v - mean[j]);
            }
        }
        std.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Standardizer { mean, std }
    }

    pub fn identity(d: usize) -> Self {
        Standardizer {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Standardized training rows with non-zero α.
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢ yᵢ` for each support vector.
    pub coefficients: Vec<f64>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub scaler: Standardizer,
    /// Whether every training point met the KKT conditions within `tol`.
    pub converged: bool,
    pub passes: usize,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients.iter().map(|c| c.abs())
    }

    /// Decision value for an already-standardized vector.
    pub fn decision_standardized(&self, z: &[f64]) -> f64 {
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            f += coef * rbf(self.gamma, sv, z);
        }
        f
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.decision_standardized(&self.scaler.transform(x)))
    }

    /// Positive decision means Fake; zero goes to Real.
    pub fn predict(&self, x: &[f64]) -> Result<Label, SvmError> {
        Ok(if self.decision(x)? > 0.0 {
            Label::Fake
        } else {
            Label::Real
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: Vec<f64>,
    alpha: Vec<f64>,
    errors: Vec<f64>,
    b: f64,
    c: f64,
    gamma: f64,
    tol: f64,
    rng: rng::Rng,
}

/// Smallest relative α change that counts as progress.
const EPS: f64 = 1e-9;
const BOUND_EPS: f64 = 1e-8;

impl Smo<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        rbf(self.gamma, &self.x[i], &self.x[j])
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > BOUND_EPS && self.alpha[i] < self.c - BOUND_EPS
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a2 + a1 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if lo >= hi {
            return false;
        }
        let (k11, k12, k22) = (self.k(i1, i1), self.k(i1, i2), self.k(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        let mut new_a2 = if eta > 1e-12 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Flat direction: move to whichever end has the lower objective.
            let f1 = y1 * (e1 - self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 - self.b) - s * a1 * k12 - a2 * k22;
            let obj = |a: f64| {
                let a1n = a1 + s * (a2 - a);
                a1n * f1 + a * f2 + 0.5 * a1n * a1n * k11 + 0.5 * a * a * k22 + s * a * a1n * k12
            };
            let (lobj, hobj) = (obj(lo), obj(hi));
            if lobj < hobj - EPS {
                lo
            } else if lobj > hobj + EPS {
                hi
            } else {
                a2
            }
        };
        if new_a2 < BOUND_EPS {
            new_a2 = 0.0;
        } else if new_a2 > self.c - BOUND_EPS {
            new_a2 = self.c;
        }
        if (new_a2 - a2).abs() < EPS * (new_a2 + a2 + EPS) {
            return false;
        }
        let new_a1 = (a1 + s * (a2 - new_a2)).clamp(0.0, self.c);

        let d1 = y1 * (new_a1 - a1);
        let d2 = y2 * (new_a2 - a2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let new_b = if new_a1 > 0.0 && new_a1 < self.c {
            b1
        } else if new_a2 > 0.0 && new_a2 < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = new_b - self.b;
        for i in 0..self.x.len() {
            self.errors[i] += d1 * self.k(i1, i) + d2 * self.k(i2, i) + db;
        }
        self.alpha[i1] = new_a1;
        self.alpha[i2] = new_a2;
        self.b = new_b;
        true
    }

    fn violates(&self, i: usize) -> bool {
        let r = self.errors[i] * self.y[i];
        (r < -self.tol && self.alpha[i] < self.c - BOUND_EPS)
            || (r > self.tol && self.alpha[i] > BOUND_EPS)
    }

    fn examine(&mut self, i2: usize) -> bool {
        if !self.violates(i2) {
            return false;
        }
        let n = self.x.len();
        let e2 = self.errors[i2];
        let non_bound: Vec<usize> = (0..n).filter(|&i| self.non_bound(i)).collect();
        if non_bound.len() > 1 {
            let mut best = None;
            let mut gap = -1.0;
            for &i in &non_bound {
                let g = (self.errors[i] - e2).abs();
                if g > gap {
                    gap = g;
                    best = Some(i);
                }
            }
            if let Some(i1) = best {
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        if !non_bound.is_empty() {
            let start = self.rng.gen_range(0..non_bound.len());
            for off in 0..non_bound.len() {
                let i1 = non_bound[(start + off) % non_bound.len()];
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let start = self.rng.gen_range(0..n);
        for off in 0..n {
            if self.take_step((start + off) % n, i2) {
                return true;
            }
        }
        false
    }

    /// Recomputes the error cache from scratch and checks every point.
    fn kkt_holds(&mut self) -> bool {
        let n = self.x.len();
        for i in 0..n {
            let mut f = self.b;
            for j in 0..n {
                if self.alpha[j] > 0.0 {
                    f += self.alpha[j] * self.y[j] * self.k(i, j);
                }
            }
            self.errors[i] = f - self.y[i];
        }
        (0..n).all(|i| !self.violates(i))
    }
}

/// Trains on raw feature rows; standardization parameters are fitted here
/// and stored in the model.
pub fn train_svm(
    rows: &[Vec<f64>],
    labels: &[Label],
    config: &SvmConfig,
) -> Result<SvmModel, SvmError> {
    if rows.len() != labels.len() {
        return Err(SvmError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    if !(config.c > 0.0) {
        return Err(SvmError::InvalidC(config.c));
    }
    if !labels.contains(&Label::Fake) || !labels.contains(&Label::Real) {
        return Err(SvmError::SingleClass);
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(SvmError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let gamma = match config.gamma {
        GammaMode::Auto => 1.0 / d.max(1) as f64,
        GammaMode::Fixed(g) => g,
    };
    if !(gamma > 0.0) {
        return Err(SvmError::InvalidGamma(gamma));
    }
    let scaler = Standardizer::fit(rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let n = x.len();
    let mut smo = Smo {
        x: &x,
        errors: y.iter().map(|v| -v).collect(),
        y,
        alpha: vec![0.0; n],
        b: 0.0,
        c: config.c,
        gamma,
        tol: config.tol,
        rng: rng::seeded(config.seed),
    };

    let mut passes = 0;
    let mut examine_all = true;
    let mut changed = 0;
    while (changed > 0 || examine_all) && passes < config.max_passes {
        changed = 0;
        for i in 0..n {
            if (examine_all || smo.non_bound(i)) && smo.examine(i) {
                changed += 1;
            }
        }
        passes += 1;
        if examine_all {
            examine_all = false;
        } else if changed == 0 {
            examine_all = true;
        }
    }
    let converged = smo.kkt_holds();
    if !converged {
        log::warn!("SMO stopped after {passes} passes with KKT violations above tol");
    }

    let mut model = SvmModel {
        support_vectors: Vec::new(),
        coefficients: Vec::new(),
        support_indices: Vec::new(),
        bias: smo.b,
        gamma,
        c: config.c,
        scaler,
        converged,
        passes,
    };
    for i in 0..n {
        if smo.alpha[i] > 0.0 {
            model.support_vectors.push(x[i].clone());
            model.coefficients.push(smo.alpha[i] * smo.y[i]);
            model.support_indices.push(i);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Vec<Vec<f64>>, Vec<Label>) {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let labels = vec![Label::Fake, Label::Fake, Label::Real, Label::Real];
        (rows, labels)
    }

    #[test]
    fn xor_is_separable_with_rbf() {
        let (rows, labels) = xor();
        let m = train_svm(&rows, &labels, &SvmConfig::default()).unwrap();
        for (r, l) in rows.iter().zip(&labels) {
            assert_eq!(m.predict(r).unwrap(), *l);
        }
        assert!(m.converged);
        // By symmetry every point is an interior support vector with equal α.
        let e2 = (-2.0f64).exp();
        let e4 = (-4.0f64).exp();
        let alpha = 1.0 / (1.0 - 2.0 * e2 + e4);
        for a in m.alphas() {
            assert!((a - alpha).abs() < 1e-2, "{a} vs {alpha}");
        }
    }

    #[test]
    fn interior_support_vectors_sit_on_margin() {
        let (rows, labels) = xor();
        let m = train_svm(&rows, &labels, &SvmConfig::default()).unwrap();
        for (k, &i) in m.support_indices.iter().enumerate() {
            let a = m.coefficients[k].abs();
            if a > 0.0 && a < m.c {
                let f = m.decision(&rows[i]).unwrap();
                assert!((f.abs() - 1.0).abs() <= 1e-3, "{f}");
            }
        }
    }

    #[test]
    fn dual_constraint_and_json() {
        let (rows, labels) = xor();
        let m = train_svm(&rows, &labels, &SvmConfig::default()).unwrap();
        assert!(m.coefficients.iter().sum::<f64>().abs() < 1e-6);
        let back = SvmModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn contract_errors() {
        let (rows, labels) = xor();
        let m = train_svm(&rows, &labels, &SvmConfig::default()).unwrap();
        assert!(matches!(
            m.predict(&[0.0; 4]),
            Err(SvmError::DimensionMismatch { .. })
        ));
        assert_eq!(
            train_svm(&rows, &[Label::Fake; 4], &SvmConfig::default()).unwrap_err(),
            SvmError::SingleClass
        );
        let bad_c = SvmConfig {
            c: 0.0,
            ..SvmConfig::default()
        };
        assert!(matches!(
            train_svm(&rows, &labels, &bad_c),
            Err(SvmError::InvalidC(_))
        ));
    }

    #[test]
    fn constant_feature_standardizes_to_zero() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.transform(&[2.0, 5.0]), vec![0.0, 0.0]);
        assert_eq!(s.transform(&[3.0, 9.0]), vec![1.0, 0.0]);
        let id = Standardizer::identity(2);
        assert_eq!(id.transform(&[0.25, -3.0]), vec![0.25, -3.0]);
    }

    #[test]
    fn zero_decision_is_real() {
        let m = SvmModel {
            support_vectors: vec![],
            coefficients: vec![],
            support_indices: vec![],
            bias: 0.0,
            gamma: 1.0,
            c: 1.0,
            scaler: Standardizer::identity(1),
            converged: true,
            passes: 0,
        };
        assert_eq!(m.predict(&[1.0]).unwrap(), Label::Real);
    }
}
