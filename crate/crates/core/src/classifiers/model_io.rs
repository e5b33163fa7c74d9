//! Versioned, self-describing model files.
//!
//! A model file carries the tokens alongside the learned parameters, so an
//! explanation report can be audited without access to the training data.
//! Serialisation is deterministic: identical models produce identical bytes.

use serde::{Deserialize, Serialize};

use super::{LinearModel, NbModel, TrainingMeta};
use crate::error::{Error, Result};
use crate::features::Vocabulary;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    kind: String,
    vocab_hash: String,
    hyperparameters: serde_json::Value,
    metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    /// `(token, weight)` for linear kinds, in token order.
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<(String, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_priors: Option<[f64; 2]>,
    /// `(token, log P(t|0), log P(t|1))` for Naive Bayes, in token order.
    #[serde(skip_serializing_if = "Option::is_none")]
    likelihoods: Option<Vec<(String, f64, f64)>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Metrics {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    epochs_run: u32,
    #[serde(default)]
    best_epoch: u32,
    #[serde(default)]
    best_accuracy: f64,
    #[serde(default)]
    accuracy_history: Vec<f64>,
}

/// A loaded model of either family, plus the vocabulary it embeds.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Linear(LinearModel),
    Nb(NbModel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Linear(m) => {
                if m.meta.algo == "logreg" {
                    "logreg"
                } else {
                    "linear"
                }
            }
            AnyModel::Nb(_) => "nb",
        }
    }

    pub fn vocab_hash(&self) -> &str {
        match self {
            AnyModel::Linear(m) => &m.vocab_hash,
            AnyModel::Nb(m) => &m.vocab_hash,
        }
    }

    pub fn as_linear(&self) -> Result<&LinearModel> {
        match self {
            AnyModel::Linear(m) => Ok(m),
            AnyModel::Nb(_) => Err(Error::WrongModelKind {
                expected: "linear".into(),
                found: "nb".into(),
            }),
        }
    }
}

/// Serialise a model (with its vocabulary) to the model-file JSON.
pub fn save_model(model: &AnyModel, vocab: &Vocabulary) -> Result<String> {
    check_hash(model.vocab_hash(), vocab)?;
    let file = match model {
        AnyModel::Linear(m) => ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: model.kind().to_string(),
            vocab_hash: m.vocab_hash.clone(),
            hyperparameters: m.meta.hyperparameters.clone(),
            metrics: Metrics {
                seed: m.meta.seed,
                epochs_run: m.meta.epochs_run,
                best_epoch: m.meta.best_epoch,
                best_accuracy: m.meta.best_accuracy,
                accuracy_history: m.meta.accuracy_history.clone(),
            },
            bias: Some(m.bias),
            weights: Some(
                vocab
                    .tokens()
                    .iter()
                    .zip(&m.weights)
                    .map(|(t, w)| (t.clone(), *w))
                    .collect(),
            ),
            log_priors: None,
            likelihoods: None,
        },
        AnyModel::Nb(m) => ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: "nb".into(),
            vocab_hash: m.vocab_hash.clone(),
            hyperparameters: serde_json::json!({ "alpha": m.alpha }),
            metrics: Metrics::default(),
            bias: None,
            weights: None,
            log_priors: Some(m.log_priors),
            likelihoods: Some(
                vocab
                    .tokens()
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (t.clone(), m.log_likelihood[0][i], m.log_likelihood[1][i]))
                    .collect(),
            ),
        },
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parse a model file back into a model and its vocabulary.
pub fn load_model(text: &str) -> Result<(AnyModel, Vocabulary)> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedModelFormat(file.format_version));
    }
    match file.kind.as_str() {
        "linear" | "logreg" => {
            let pairs = file.weights.ok_or_else(|| missing("weights"))?;
            let tokens: Vec<String> = pairs.iter().map(|(t, _)| t.clone()).collect();
            let vocab = Vocabulary::from_tokens(tokens);
            let mut weights = vec![0.0; vocab.len()];
            for (t, w) in &pairs {
                weights[vocab.index_of(t).expect("token from same list") as usize] = *w;
            }
            check_hash(&file.vocab_hash, &vocab)?;
            let model = LinearModel {
                weights,
                bias: file.bias.ok_or_else(|| missing("bias"))?,
                vocab_hash: file.vocab_hash,
                meta: TrainingMeta {
                    algo: file.kind,
                    seed: file.metrics.seed,
                    epochs_run: file.metrics.epochs_run,
                    best_epoch: file.metrics.best_epoch,
                    best_accuracy: file.metrics.best_accuracy,
                    accuracy_history: file.metrics.accuracy_history,
                    hyperparameters: file.hyperparameters,
                },
            };
            Ok((AnyModel::Linear(model), vocab))
        }
        "nb" => {
            let rows = file.likelihoods.ok_or_else(|| missing("likelihoods"))?;
            let tokens: Vec<String> = rows.iter().map(|(t, ..)| t.clone()).collect();
            let vocab = Vocabulary::from_tokens(tokens);
            let mut ll = [vec![0.0; vocab.len()], vec![0.0; vocab.len()]];
            for (t, l0, l1) in &rows {
                let i = vocab.index_of(t).expect("token from same list") as usize;
                ll[0][i] = *l0;
                ll[1][i] = *l1;
            }
            check_hash(&file.vocab_hash, &vocab)?;
            let alpha = file
                .hyperparameters
                .get("alpha")
                .and_then(|v| v.as_f64())
                .ok_or_else(|| missing("alpha"))?;
            let model = NbModel {
                log_priors: file.log_priors.ok_or_else(|| missing("log_priors"))?,
                log_likelihood: ll,
                alpha,
                vocab_hash: file.vocab_hash,
            };
            Ok((AnyModel::Nb(model), vocab))
        }
        other => Err(Error::WrongModelKind {
            expected: "linear|logreg|nb".into(),
            found: other.into(),
        }),
    }
}

fn check_hash(expected: &str, vocab: &Vocabulary) -> Result<()> {
    let actual = vocab.hash();
    if expected != actual {
        return Err(Error::VocabularyMismatch {
            expected: expected.into(),
            found: actual,
        });
    }
    Ok(())
}

fn missing(field: &str) -> Error {
    Error::Config(format!("model file is missing `{field}`"))
}
