use serde::{Deserialize, Serialize};

use super::eval::EvalError;
use crate::corpus::Label;

/// Accuracy restricted to the items on which two classifiers agree. This is
/// not a vote: disagreements are simply left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub n_total: usize,
    pub n_agreed: usize,
    pub n_agreed_correct: usize,
    /// 0 when nothing was agreed on (see `empty`).
    pub agreed_accuracy: f64,
    pub coverage: f64,
    pub empty: bool,
}

pub fn agreement_ensemble(
    preds_a: &[Label],
    preds_b: &[Label],
    gold: &[Label],
) -> Result<EnsembleReport, EvalError> {
    for other in [preds_b, gold] {
        if other.len() != preds_a.len() {
            return Err(EvalError::LengthMismatch {
                left: preds_a.len(),
                right: other.len(),
            });
        }
    }
    let n_total = gold.len();
    let mut n_agreed = 0;
    let mut n_agreed_correct = 0;
    for ((a, b), g) in preds_a.iter().zip(preds_b).zip(gold) {
        if a == b {
            n_agreed += 1;
            if a == g {
                n_agreed_correct += 1;
            }
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(EnsembleReport {
        n_total,
        n_agreed,
        n_agreed_correct,
        agreed_accuracy: ratio(n_agreed_correct, n_agreed),
        coverage: ratio(n_agreed, n_total),
        empty: n_agreed == 0,
    })
}
