//! RBF-kernel SVM, classifier evaluation, cross-validation and the agreement
//! ensemble.

mod cv;
mod ensemble;
mod eval;
mod svm;

pub use cv::{
    cross_corpus_evaluate, cross_validate, BoxError, CvError, CvReport, FoldReport, LabeledData,
    Trainer,
};
pub use ensemble::{agreement_ensemble, EnsembleReport};
pub use eval::{evaluate, EvalError, EvalReport};
pub use svm::{train_svm, GammaMode, Standardizer, SvmConfig, SvmError, SvmModel};
