//! Interpretable classifiers over unigram count vectors: a linear model
//! trained by seeded SGD with holdout early stopping, multinomial Naive
//! Bayes, and L2-regularised logistic regression.
//!
//! The linear models share one contract: a document's score is
//! `bias + sum(count_i * w_i)` and the per-feature contributions returned by
//! [`score`] add back up to that score exactly. That identity is what makes
//! the verdicts auditable.

mod linear;
mod logreg;
mod model_io;
mod nb;

pub use linear::{train_linear, LinearHyper};
pub use logreg::{logistic_loss_and_gradient, train_logreg, LogRegHyper};
pub use model_io::{load_model, save_model, AnyModel, MODEL_FORMAT_VERSION};
pub use nb::{predict_nb, train_nb, NbModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::CountVector;

/// Dense per-token weights plus bias; the interpretable classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// One weight per vocabulary slot, in vocabulary order.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Hash of the vocabulary the weights are aligned to.
    pub vocab_hash: String,
    pub meta: TrainingMeta,
}

/// Provenance recorded with every trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    /// "linear" (SGD + early stopping) or "logreg" (batch gradient descent).
    pub algo: String,
    pub seed: u64,
    /// Epochs (SGD) or iterations (batch descent) actually run.
    pub epochs_run: u32,
    /// Epoch whose snapshot was kept; equals `epochs_run` without early stopping.
    pub best_epoch: u32,
    /// Validation accuracy of the kept snapshot (training accuracy for logreg,
    /// which takes no validation split).
    pub best_accuracy: f64,
    /// Validation accuracy after each epoch, for the SGD trainer.
    pub accuracy_history: Vec<f64>,
    /// The hyperparameters the trainer ran with.
    pub hyperparameters: serde_json::Value,
}

impl LinearModel {
    /// Weights, in a fresh vector, with the given features zeroed. Used by
    /// the ablation walk, which never mutates the trained model.
    pub fn with_zeroed(&self, features: &[u32]) -> LinearModel {
        let mut clone = self.clone();
        for &f in features {
            clone.weights[f as usize] = 0.0;
        }
        clone
    }
}

/// Anything that maps a count vector to a signed decision score
/// (positive means class 1).
pub trait DecisionScorer {
    fn decision_score(&self, v: &CountVector) -> Result<f64>;
    fn vocab_hash(&self) -> &str;
    fn vocab_len(&self) -> usize;
}

impl DecisionScorer for LinearModel {
    fn decision_score(&self, v: &CountVector) -> Result<f64> {
        Ok(score(self, v)?.0)
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn vocab_len(&self) -> usize {
        self.weights.len()
    }
}

/// Class from a decision score: positive is class 1, ties go to class 0.
pub fn class_from_score(score: f64) -> u8 {
    if score > 0.0 {
        1
    } else {
        0
    }
}

/// Score a document and break the score down per feature.
///
/// The contributions list exactly the features with nonzero counts, as
/// `(feature, count * weight)`; the total is `bias` plus the contributions
/// summed in entry order, so re-adding them reproduces the total exactly.
pub fn score(model: &LinearModel, v: &CountVector) -> Result<(f64, Vec<(u32, f64)>)> {
    let mut contributions = Vec::with_capacity(v.entries.len());
    let mut total = model.bias;
    for &(idx, count) in &v.entries {
        let w = *model
            .weights
            .get(idx as usize)
            .ok_or_else(|| vocab_mismatch(model.weights.len(), idx))?;
        let c = count as f64 * w;
        contributions.push((idx, c));
        total += c;
    }
    Ok((total, contributions))
}

/// Predicted class for one document. Ties (score exactly 0) go to class 0.
pub fn predict(model: &LinearModel, v: &CountVector) -> Result<u8> {
    Ok(class_from_score(score(model, v)?.0))
}

fn vocab_mismatch(vocab_len: usize, idx: u32) -> Error {
    Error::VocabularyMismatch {
        expected: format!("{vocab_len} features"),
        found: format!("feature index {idx}"),
    }
}

/// One labelled, vectorised document ready for evaluation.
#[derive(Debug, Clone)]
pub struct EvalDoc {
    pub id: String,
    pub counts: CountVector,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub id: String,
    pub score: f64,
    pub predicted: u8,
    pub true_label: u8,
}

/// Accuracy, confusion counts and per-sample scores over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `confusion[true_label][predicted]`.
    pub confusion: [[u64; 2]; 2],
    pub rows: Vec<EvalRow>,
}

/// Evaluate any scorer over a labelled dataset.
pub fn evaluate<M: DecisionScorer>(model: &M, docs: &[EvalDoc]) -> Result<EvalReport> {
    if docs.is_empty() {
        return Err(Error::Config("cannot evaluate on an empty dataset".into()));
    }
    let mut confusion = [[0u64; 2]; 2];
    let mut rows = Vec::with_capacity(docs.len());
    for doc in docs {
        let s = model.decision_score(&doc.counts)?;
        let predicted = class_from_score(s);
        confusion[doc.label as usize][predicted as usize] += 1;
        rows.push(EvalRow {
            id: doc.id.clone(),
            score: s,
            predicted,
            true_label: doc.label,
        });
    }
    let correct = confusion[0][0] + confusion[1][1];
    Ok(EvalReport {
        accuracy: correct as f64 / docs.len() as f64,
        confusion,
        rows,
    })
}

/// Plain accuracy of a weight vector over labelled count vectors; the
/// trainers use this for their holdout checks.
pub(crate) fn weights_accuracy(weights: &[f64], bias: f64, docs: &[(CountVector, u8)]) -> f64 {
    let correct = docs
        .iter()
        .filter(|(v, label)| {
            let z: f64 = bias
                + v.entries
                    .iter()
                    .map(|&(i, c)| c as f64 * weights[i as usize])
                    .sum::<f64>();
            class_from_score(z) == *label
        })
        .count();
    correct as f64 / docs.len() as f64
}
