use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to evaluate")]
    Empty,
}

/// Accuracy and confusion counts with Fake as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

pub fn evaluate(predictions: &[Label], gold: &[Label]) -> Result<EvalReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, g) in predictions.iter().zip(gold) {
        match (p, g) {
            (Label::Fake, Label::Fake) => tp += 1,
            (Label::Fake, Label::Real) => fp += 1,
            (Label::Real, Label::Real) => tn += 1,
            (Label::Real, Label::Fake) => fn_ += 1,
        }
    }
    let n = gold.len();
    Ok(EvalReport {
        n,
        accuracy: (tp + tn) as f64 / n as f64,
        tp,
        fp,
        tn,
        fn_,
    })
}
