use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{evaluate, EvalError, EvalReport};
use crate::corpus::{Corpus, Label};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum CvError {
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: BoxError,
    },
    #[error("fold vector has {got} entries for {expected} rows")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fold {fold} has no test rows")]
    EmptyFold { fold: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Anything with a gold label per row.
pub trait LabeledData: Sync {
    fn len(&self) -> usize;
    fn label(&self, i: usize) -> Label;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LabeledData for Corpus {
    fn len(&self) -> usize {
        Corpus::len(self)
    }

    fn label(&self, i: usize) -> Label {
        self.posts()[i].label
    }
}

/// A training procedure for [`cross_validate`]. `fold` is the held-out fold
/// index, available for per-fold seeding.
pub trait Trainer<D: LabeledData + ?Sized>: Sync {
    type Model;

    fn train(&self, data: &D, train: &[usize], fold: usize) -> Result<Self::Model, BoxError>;

    fn predict(
        &self,
        model: &Self::Model,
        data: &D,
        rows: &[usize],
    ) -> Result<Vec<Label>, BoxError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub mean_accuracy: f64,
    /// Prediction for every row from the model that did not see it.
    pub out_of_fold: Vec<Label>,
}

/// Trains on all folds but one and evaluates on the held-out fold, for each
/// fold in turn. Folds run in parallel; results do not depend on scheduling.
pub fn cross_validate<D, T>(
    trainer: &T,
    data: &D,
    fold_of: &[usize],
    k: usize,
) -> Result<CvReport, CvError>
where
    D: LabeledData + ?Sized,
    T: Trainer<D>,
{
    if fold_of.len() != data.len() {
        return Err(CvError::LengthMismatch {
            expected: data.len(),
            got: fold_of.len(),
        });
    }
    let runs: Vec<(FoldReport, Vec<usize>, Vec<Label>)> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| fold_of[i] == fold);
            if test.is_empty() {
                return Err(CvError::EmptyFold { fold });
            }
            let wrap = |source| CvError::Fold { fold, source };
            let model = trainer.train(data, &train, fold).map_err(wrap)?;
            let preds = trainer.predict(&model, data, &test).map_err(wrap)?;
            let gold: Vec<Label> = test.iter().map(|&i| data.label(i)).collect();
            let report = evaluate(&preds, &gold)?;
            let fr = FoldReport {
                fold,
                train_size: train.len(),
                report,
            };
            Ok((fr, test, preds))
        })
        .collect::<Result<_, CvError>>()?;

    let mut out_of_fold = vec![Label::Real; data.len()];
    let mut folds = Vec::with_capacity(k);
    for (report, test, preds) in runs {
        for (i, p) in test.into_iter().zip(preds) {
            out_of_fold[i] = p;
        }
        folds.push(report);
    }
    let mean_accuracy = folds.iter().map(|f| f.report.accuracy).sum::<f64>() / k.max(1) as f64;
    Ok(CvReport {
        folds,
        mean_accuracy,
        out_of_fold,
    })
}

/// Trains on every row of `train_data` and evaluates on every row of
/// `test_data`.
pub fn cross_corpus_evaluate<D, T>(
    trainer: &T,
    train_data: &D,
    test_data: &D,
) -> Result<EvalReport, CvError>
where
    D: LabeledData + ?Sized,
    T: Trainer<D>,
{
    let wrap = |source| CvError::Fold { fold: 0, source };
    let train: Vec<usize> = (0..train_data.len()).collect();
    let test: Vec<usize> = (0..test_data.len()).collect();
    let model = trainer.train(train_data, &train, 0).map_err(wrap)?;
    let preds = trainer.predict(&model, test_data, &test).map_err(wrap)?;
    let gold: Vec<Label> = test.iter().map(|&i| test_data.label(i)).collect();
    Ok(evaluate(&preds, &gold)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::make_folds;
    use std::collections::HashMap;

    struct ConstantFake;

    impl Trainer<Corpus> for ConstantFake {
        type Model = ();

        fn train(&self, _: &Corpus, _: &[usize], _: usize) -> Result<(), BoxError> {
            Ok(())
        }

        fn predict(&self, _: &(), _: &Corpus, rows: &[usize]) -> Result<Vec<Label>, BoxError> {
            Ok(vec![Label::Fake; rows.len()])
        }
    }

    struct Memorizer;

    impl Trainer<Corpus> for Memorizer {
        type Model = HashMap<String, Label>;

        fn train(&self, c: &Corpus, train: &[usize], _: usize) -> Result<Self::Model, BoxError> {
            Ok(train
                .iter()
                .map(|&i| (c.posts()[i].text.clone(), c.posts()[i].label))
                .collect())
        }

        fn predict(
            &self,
            m: &Self::Model,
            c: &Corpus,
            rows: &[usize],
        ) -> Result<Vec<Label>, BoxError> {
            Ok(rows
                .iter()
                .map(|&i| m.get(&c.posts()[i].text).copied().unwrap_or(Label::Real))
                .collect())
        }
    }

    struct Failing;

    impl Trainer<Corpus> for Failing {
        type Model = ();

        fn train(&self, _: &Corpus, _: &[usize], fold: usize) -> Result<(), BoxError> {
            if fold == 3 {
                Err("boom".into())
            } else {
                Ok(())
            }
        }

        fn predict(&self, _: &(), _: &Corpus, rows: &[usize]) -> Result<Vec<Label>, BoxError> {
            Ok(vec![Label::Real; rows.len()])
        }
    }

    fn balanced(n: usize) -> Corpus {
        Corpus::from_texts(
            "b",
            (0..n).map(|i| {
                (
                    format!("post {i}"),
                    if i % 2 == 0 { Label::Fake } else { Label::Real },
                )
            }),
        )
    }

    #[test]
    fn constant_trainer_scores_fake_share() {
        let c = balanced(50);
        let plan = make_folds(&c, 5, 3).unwrap();
        let fv = plan.fold_vector(&c).unwrap();
        let r = cross_validate(&ConstantFake, &c, &fv, 5).unwrap();
        assert_eq!(r.folds.len(), 5);
        for f in &r.folds {
            let test: Vec<usize> = (0..50).filter(|&i| fv[i] == f.fold).collect();
            let fakes = test
                .iter()
                .filter(|&&i| c.posts()[i].label == Label::Fake)
                .count();
            assert_eq!(f.report.accuracy, fakes as f64 / test.len() as f64);
            assert_eq!(f.train_size + test.len(), 50);
        }
        let folds: Vec<usize> = r.folds.iter().map(|f| f.fold).collect();
        assert_eq!(folds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn mean_is_mean_of_reports() {
        let c = balanced(40);
        let fv = make_folds(&c, 5, 9).unwrap().fold_vector(&c).unwrap();
        let r = cross_validate(&Memorizer, &c, &fv, 5).unwrap();
        let mean = r.folds.iter().map(|f| f.report.accuracy).sum::<f64>() / 5.0;
        assert_eq!(r.mean_accuracy, mean);
        assert_eq!(r.out_of_fold, vec![Label::Real; 40]);
    }

    #[test]
    fn failure_names_fold() {
        let c = balanced(20);
        let fv = make_folds(&c, 5, 0).unwrap().fold_vector(&c).unwrap();
        let err = cross_validate(&Failing, &c, &fv, 5).unwrap_err();
        assert!(matches!(err, CvError::Fold { fold: 3, .. }));
        assert_eq!(err.to_string(), "fold 3: boom");
    }

    #[test]
    fn cross_corpus_uses_other_corpus() {
        let a = balanced(10);
        let r = cross_corpus_evaluate(&Memorizer, &a, &a).unwrap();
        assert_eq!(r.accuracy, 1.0);
        let b = Corpus::from_texts("other", [("unseen", Label::Fake)]);
        assert_eq!(
            cross_corpus_evaluate(&Memorizer, &a, &b).unwrap().accuracy,
            0.0
        );
    }
}
