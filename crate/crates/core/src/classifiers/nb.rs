//! Multinomial Naive Bayes with Laplace smoothing, in log space.

use serde::{Deserialize, Serialize};

use super::{class_from_score, DecisionScorer};
use crate::error::{Error, Result};
use crate::features::{CountVector, Vocabulary};

/// Per-class log-priors and smoothed per-feature log-likelihoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub log_priors: [f64; 2],
    /// `log_likelihood[class][feature]` = log P(token | class).
    pub log_likelihood: [Vec<f64>; 2],
    pub alpha: f64,
    pub vocab_hash: String,
}

impl NbModel {
    /// Unnormalised log-posterior of one class for a document.
    pub fn log_posterior(&self, v: &CountVector, class: usize) -> Result<f64> {
        let table = &self.log_likelihood[class];
        let mut lp = self.log_priors[class];
        for &(idx, count) in &v.entries {
            let ll = table
                .get(idx as usize)
                .ok_or_else(|| Error::VocabularyMismatch {
                    expected: format!("{} features", table.len()),
                    found: format!("feature index {idx}"),
                })?;
            lp += count as f64 * ll;
        }
        Ok(lp)
    }
}

impl DecisionScorer for NbModel {
    fn decision_score(&self, v: &CountVector) -> Result<f64> {
        Ok(self.log_posterior(v, 1)? - self.log_posterior(v, 0)?)
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn vocab_len(&self) -> usize {
        self.log_likelihood[0].len()
    }
}

/// Fit the multinomial model: priors from document counts, likelihoods from
/// token counts with additive `alpha` smoothing. No iteration, no tuning.
pub fn train_nb(vocab: &Vocabulary, train: &[(CountVector, u8)], alpha: f64) -> Result<NbModel> {
    if alpha <= 0.0 || alpha.is_nan() {
        return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
    }
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut doc_counts = [0u64; 2];
    let mut token_counts = [vec![0u64; vocab.len()], vec![0u64; vocab.len()]];
    for (v, label) in train {
        let class = *label as usize;
        doc_counts[class] += 1;
        for &(idx, count) in &v.entries {
            token_counts[class][idx as usize] += count as u64;
        }
    }
    for label in 0..2u8 {
        if doc_counts[label as usize] == 0 {
            return Err(Error::EmptyClass {
                label,
                split: "train".into(),
            });
        }
    }
    let total_docs = (doc_counts[0] + doc_counts[1]) as f64;
    let log_priors = [
        (doc_counts[0] as f64 / total_docs).ln(),
        (doc_counts[1] as f64 / total_docs).ln(),
    ];
    let likelihoods = |counts: &[u64]| -> Vec<f64> {
        let total: u64 = counts.iter().sum();
        let denom = total as f64 + alpha * vocab.len() as f64;
        counts
            .iter()
            .map(|&c| ((c as f64 + alpha) / denom).ln())
            .collect()
    };
    Ok(NbModel {
        log_priors,
        log_likelihood: [likelihoods(&token_counts[0]), likelihoods(&token_counts[1])],
        alpha,
        vocab_hash: vocab.hash(),
    })
}

/// Argmax class by log-posterior; a tie goes to class 0.
pub fn predict_nb(model: &NbModel, v: &CountVector) -> Result<u8> {
    Ok(class_from_score(model.decision_score(v)?))
}
