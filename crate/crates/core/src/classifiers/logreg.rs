//! L2-regularised logistic regression by full-batch gradient descent with
//! backtracking line search. Runs once to convergence; no holdout, no early
//! stopping.

use serde::{Deserialize, Serialize};

use super::{linear::sigmoid, weights_accuracy, LinearModel, TrainingMeta};
use crate::error::{Error, Result};
use crate::features::{CountVector, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegHyper {
    pub l2: f64,
    pub max_iters: u32,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        Self {
            l2: 1e-6,
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Mean logistic loss plus `l2/2 * ||w||^2` and its exact gradient.
/// The bias is not regularised.
pub fn logistic_loss_and_gradient(
    weights: &[f64],
    bias: f64,
    docs: &[(CountVector, u8)],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = docs.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0f64; weights.len()];
    let mut grad_b = 0.0f64;
    for (v, label) in docs {
        let z = bias
            + v.entries
                .iter()
                .map(|&(i, c)| c as f64 * weights[i as usize])
                .sum::<f64>();
        let y = *label as f64;
        // log(1 + e^z) - y z, computed without overflow.
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
        let g = sigmoid(z) - y;
        for &(i, c) in &v.entries {
            grad_w[i as usize] += g * c as f64;
        }
        grad_b += g;
    }
    loss /= n;
    grad_b /= n;
    let mut reg = 0.0;
    for (gw, w) in grad_w.iter_mut().zip(weights) {
        *gw = *gw / n + l2 * w;
        reg += w * w;
    }
    loss += 0.5 * l2 * reg;
    (loss, grad_w, grad_b)
}

/// Train by gradient descent until the gradient norm drops below `tol` or
/// `max_iters` is reached. The step size comes from Armijo backtracking, so
/// the run is deterministic and needs no learning-rate knob.
pub fn train_logreg(
    vocab: &Vocabulary,
    train: &[(CountVector, u8)],
    hyper: &LogRegHyper,
) -> Result<LinearModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for label in 0..2u8 {
        if !train.iter().any(|(_, l)| *l == label) {
            return Err(Error::EmptyClass {
                label,
                split: "train".into(),
            });
        }
    }

    let mut weights = vec![0.0f64; vocab.len()];
    let mut bias = 0.0f64;
    let mut step = 1.0f64;
    let mut iters_run = 0u32;

    for iter in 1..=hyper.max_iters {
        iters_run = iter;
        let (loss, grad_w, grad_b) = logistic_loss_and_gradient(&weights, bias, train, hyper.l2);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: iter,
                detail: "batch loss is not finite".into(),
            });
        }
        let grad_sq: f64 = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        if grad_sq.sqrt() < hyper.tol {
            break;
        }

        // Armijo backtracking, warm-started from the previous step size.
        step = (step * 2.0).min(1e4);
        let mut accepted = false;
        for _ in 0..60 {
            let cand_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let cand_b = bias - step * grad_b;
            let (cand_loss, _, _) = logistic_loss_and_gradient(&cand_w, cand_b, train, hyper.l2);
            if cand_loss.is_finite() && cand_loss <= loss - 1e-4 * step * grad_sq {
                weights = cand_w;
                bias = cand_b;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Gradient direction yields no decrease at any representable
            // step; treat as converged.
            break;
        }
    }

    let train_accuracy = weights_accuracy(&weights, bias, train);
    Ok(LinearModel {
        weights,
        bias,
        vocab_hash: vocab.hash(),
        meta: TrainingMeta {
            algo: "logreg".into(),
            seed: hyper.seed,
            epochs_run: iters_run,
            best_epoch: iters_run,
            best_accuracy: train_accuracy,
            accuracy_history: vec![],
            hyperparameters: serde_json::to_value(hyper).expect("hyper serialises"),
        },
    })
}
