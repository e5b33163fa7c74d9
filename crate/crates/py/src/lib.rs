//! Python bindings: the tokeniser, the three classifiers, entropy analysis
//! and HTML explanations, behind a text-in/text-out surface.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use veridict::analysis;
use veridict::classifiers::{
    self, evaluate, load_model, save_model, AnyModel, EvalDoc, LinearHyper, LogRegHyper,
};
use veridict::corpus::{self, Sample};
use veridict::explain::{explain_document, render_report, RenderOptions};
use veridict::features::{class_frequencies, select_salient, vectorize, CountVector, Vocabulary};
use veridict::pipeline::labeled_counts;
use veridict::rewrite;
use veridict::synth;
use veridict::tokenizer::{self, TokenStream};

type StatsRow = (String, f64, f64, f64, f64);
type SampleDicts = Vec<Py<PyDict>>;

fn err(e: veridict::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn check_labels(texts: &[String], labels: &[u8]) -> PyResult<()> {
    if texts.len() != labels.len() {
        return Err(PyValueError::new_err(format!(
            "{} texts but {} labels",
            texts.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|l| *l > 1) {
        return Err(PyValueError::new_err("labels must be 0 or 1"));
    }
    Ok(())
}

fn streams_of(texts: &[String], labels: &[u8]) -> Vec<(TokenStream, u8)> {
    texts
        .iter()
        .zip(labels)
        .map(|(t, l)| (tokenizer::tokenize(t), *l))
        .collect()
}

/// Fold Unicode quote and dash variants onto their ASCII forms.
#[pyfunction]
fn normalize_punctuation(text: &str) -> String {
    tokenizer::normalize_punctuation(text)
}

/// Tokenise text into cased word and punctuation unigrams.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    tokenizer::tokenize(text).tokens
}

/// Strip boilerplate, page numbers and chapter headings from raw novel text.
#[pyfunction]
fn clean_source(text: &str) -> PyResult<String> {
    corpus::clean_source(text).map_err(err)
}

/// Chunk cleaned text into full-stop-terminated excerpts.
#[pyfunction]
#[pyo3(signature = (text, min_words=92, max_words=125, seed=0))]
fn chunk_text(text: &str, min_words: usize, max_words: usize, seed: u64) -> PyResult<Vec<String>> {
    let outcome = corpus::chunk_text(text, min_words, max_words, seed).map_err(err)?;
    Ok(outcome.excerpts.into_iter().map(|e| e.text).collect())
}

/// Shannon entropy (bits) of a token list.
#[pyfunction]
fn shannon_entropy(tokens: Vec<String>) -> PyResult<f64> {
    analysis::shannon_entropy(&tokens).map_err(err)
}

/// Case-folded relative frequency of the letters a-z across texts.
#[pyfunction]
fn letter_distribution(texts: Vec<String>) -> PyResult<Vec<(char, f64)>> {
    let streams: Vec<TokenStream> = texts.iter().map(|t| tokenizer::tokenize(t)).collect();
    tokenizer::letter_distribution(&streams).map_err(err)
}

/// Entropy of growing prefixes: `[(token_count, bits), ...]`.
#[pyfunction]
#[pyo3(signature = (tokens, step=1000))]
fn entropy_curve(tokens: Vec<String>, step: usize) -> PyResult<Vec<(u64, f64)>> {
    Ok(analysis::entropy_curve(0, &tokens, step)
        .map_err(err)?
        .points)
}

/// The exact rewriting prompt for one excerpt.
#[pyfunction]
fn build_prompt(excerpt: &str) -> PyResult<String> {
    rewrite::build_prompt(excerpt).map_err(err)
}

/// Per-class relative frequencies: `[(token, f0, f1, f_max, R), ...]`
/// sorted by `f_max` descending.
#[pyfunction]
fn feature_stats(texts: Vec<String>, labels: Vec<u8>) -> PyResult<Vec<StatsRow>> {
    check_labels(&texts, &labels)?;
    let streams = streams_of(&texts, &labels);
    let only: Vec<TokenStream> = streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&only).map_err(err)?;
    let stats = class_frequencies(&streams, &vocab).map_err(err)?;
    let mut order: Vec<u32> = (0..stats.len() as u32).collect();
    order.sort_by(|&a, &b| {
        stats
            .f_max(b)
            .partial_cmp(&stats.f_max(a))
            .unwrap()
            .then_with(|| vocab.token(a).cmp(vocab.token(b)))
    });
    Ok(order
        .into_iter()
        .map(|i| {
            (
                vocab.token(i).to_string(),
                stats.f0[i as usize],
                stats.f1[i as usize],
                stats.f_max(i),
                stats.ratio(i),
            )
        })
        .collect())
}

/// Tokens passing `f_max >= threshold_f` and `R >= threshold_r`.
#[pyfunction]
#[pyo3(signature = (texts, labels, threshold_f=100.0, threshold_r=0.75))]
fn salient_features(
    texts: Vec<String>,
    labels: Vec<u8>,
    threshold_f: f64,
    threshold_r: f64,
) -> PyResult<Vec<String>> {
    check_labels(&texts, &labels)?;
    let streams = streams_of(&texts, &labels);
    let only: Vec<TokenStream> = streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&only).map_err(err)?;
    let stats = class_frequencies(&streams, &vocab).map_err(err)?;
    let subset = select_salient(&stats, threshold_f, threshold_r);
    Ok(subset
        .features
        .iter()
        .map(|&i| vocab.token(i).to_string())
        .collect())
}

/// Generate the paired synthetic demo corpus as a list of dicts.
#[pyfunction]
#[pyo3(signature = (n_pairs=100, seed=42))]
fn synthetic_pairs(py: Python<'_>, n_pairs: usize, seed: u64) -> PyResult<SampleDicts> {
    synth::synthetic_pairs(n_pairs, seed)
        .into_iter()
        .map(|s| sample_to_dict(py, &s))
        .collect()
}

fn sample_to_dict(py: Python<'_>, s: &Sample) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("id", &s.id)?;
    d.set_item("text", &s.text)?;
    d.set_item("label", s.label)?;
    d.set_item("source", &s.source)?;
    d.set_item("word_count", s.word_count)?;
    Ok(d.into())
}

fn sample_from_dict(d: &Bound<'_, PyDict>) -> PyResult<Sample> {
    let get = |key: &str| -> PyResult<Bound<'_, PyAny>> {
        d.get_item(key)?
            .ok_or_else(|| PyValueError::new_err(format!("sample dict is missing `{key}`")))
    };
    let text: String = get("text")?.extract()?;
    Ok(Sample {
        id: get("id")?.extract()?,
        label: get("label")?.extract()?,
        source: get("source")?.extract()?,
        word_count: corpus::count_words(&text),
        text,
        token_count: None,
    })
}

/// Pair-preserving deterministic split; returns (train, validation, test).
#[pyfunction]
#[pyo3(signature = (samples, ratios=(0.7, 0.15, 0.15), seed=0))]
fn split_pairs(
    py: Python<'_>,
    samples: Vec<Bound<'_, PyDict>>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> PyResult<(SampleDicts, SampleDicts, SampleDicts)> {
    let samples: Vec<Sample> = samples
        .iter()
        .map(sample_from_dict)
        .collect::<PyResult<_>>()?;
    let split =
        corpus::split_dataset(&samples, [ratios.0, ratios.1, ratios.2], seed).map_err(err)?;
    let dump = |list: &[Sample]| -> PyResult<SampleDicts> {
        list.iter().map(|s| sample_to_dict(py, s)).collect()
    };
    Ok((
        dump(&split.train)?,
        dump(&split.validation)?,
        dump(&split.test)?,
    ))
}

/// A trained interpretable linear model bound to its vocabulary.
#[pyclass]
struct LinearModel {
    model: classifiers::LinearModel,
    vocab: Vocabulary,
}

impl LinearModel {
    fn counts(&self, text: &str) -> CountVector {
        vectorize(&tokenizer::tokenize(text), &self.vocab)
    }
}

#[pymethods]
impl LinearModel {
    /// `bias + sum(count * weight)` and the per-token contributions.
    fn score(&self, text: &str) -> PyResult<(f64, Vec<(String, f64)>)> {
        let (total, contributions) =
            classifiers::score(&self.model, &self.counts(text)).map_err(err)?;
        Ok((
            total,
            contributions
                .into_iter()
                .map(|(i, c)| (self.vocab.token(i).to_string(), c))
                .collect(),
        ))
    }

    /// Predicted class: 1 (LLM) if the score is positive, else 0 (human).
    fn predict(&self, text: &str) -> PyResult<u8> {
        classifiers::predict(&self.model, &self.counts(text)).map_err(err)
    }

    /// Accuracy over labelled texts.
    fn evaluate(&self, texts: Vec<String>, labels: Vec<u8>) -> PyResult<f64> {
        check_labels(&texts, &labels)?;
        let docs: Vec<EvalDoc> = texts
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (t, l))| EvalDoc {
                id: i.to_string(),
                counts: self.counts(t),
                label: *l,
            })
            .collect();
        Ok(evaluate(&self.model, &docs).map_err(err)?.accuracy)
    }

    /// Weight of one token (0.0 when out of vocabulary).
    fn weight(&self, token: &str) -> f64 {
        self.vocab
            .index_of(token)
            .map(|i| self.model.weights[i as usize])
            .unwrap_or(0.0)
    }

    /// The strongest-|weight| tokens: `[(token, weight), ...]`.
    #[pyo3(signature = (n=20))]
    fn top_features(&self, n: usize) -> Vec<(String, f64)> {
        let mut order: Vec<u32> = (0..self.vocab.len() as u32).collect();
        order.sort_by(|&a, &b| {
            self.model.weights[b as usize]
                .abs()
                .partial_cmp(&self.model.weights[a as usize].abs())
                .unwrap()
        });
        order
            .into_iter()
            .take(n)
            .map(|i| {
                (
                    self.vocab.token(i).to_string(),
                    self.model.weights[i as usize],
                )
            })
            .collect()
    }

    /// Self-contained HTML report highlighting every token of every text.
    #[pyo3(signature = (texts, labels=None))]
    fn explain_html(&self, texts: Vec<String>, labels: Option<Vec<u8>>) -> PyResult<String> {
        let views = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut stream = tokenizer::tokenize(t);
                stream.source_id = format!("text-{i}");
                explain_document(
                    &self.model,
                    &self.vocab,
                    &stream,
                    labels.as_ref().and_then(|l| l.get(i).copied()),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        render_report(&self.model, &views, None, &RenderOptions::default()).map_err(err)
    }

    /// Serialise to the versioned model-file JSON.
    fn to_json(&self) -> PyResult<String> {
        save_model(&AnyModel::Linear(self.model.clone()), &self.vocab).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (model, vocab) = load_model(text).map_err(err)?;
        Ok(Self {
            model: model.as_linear().map_err(err)?.clone(),
            vocab,
        })
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.model.bias
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    #[getter]
    fn best_epoch(&self) -> u32 {
        self.model.meta.best_epoch
    }

    #[getter]
    fn best_accuracy(&self) -> f64 {
        self.model.meta.best_accuracy
    }

    fn __repr__(&self) -> String {
        format!(
            "LinearModel(algo={}, vocab={}, best_epoch={})",
            self.model.meta.algo,
            self.vocab.len(),
            self.model.meta.best_epoch
        )
    }
}

/// Multinomial Naive Bayes over the same unigram features.
#[pyclass]
struct NbModel {
    model: classifiers::NbModel,
    vocab: Vocabulary,
}

#[pymethods]
impl NbModel {
    fn predict(&self, text: &str) -> PyResult<u8> {
        let v = vectorize(&tokenizer::tokenize(text), &self.vocab);
        classifiers::predict_nb(&self.model, &v).map_err(err)
    }

    fn evaluate(&self, texts: Vec<String>, labels: Vec<u8>) -> PyResult<f64> {
        check_labels(&texts, &labels)?;
        let docs: Vec<EvalDoc> = texts
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (t, l))| EvalDoc {
                id: i.to_string(),
                counts: vectorize(&tokenizer::tokenize(t), &self.vocab),
                label: *l,
            })
            .collect();
        Ok(evaluate(&self.model, &docs).map_err(err)?.accuracy)
    }

    fn to_json(&self) -> PyResult<String> {
        save_model(&AnyModel::Nb(self.model.clone()), &self.vocab).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (model, vocab) = load_model(text).map_err(err)?;
        match model {
            AnyModel::Nb(model) => Ok(Self { model, vocab }),
            _ => Err(PyValueError::new_err(
                "model file is not a Naive Bayes model",
            )),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "NbModel(alpha={}, vocab={})",
            self.model.alpha,
            self.vocab.len()
        )
    }
}

/// Train the linear classifier by seeded SGD with holdout early stopping.
#[pyfunction]
#[pyo3(signature = (train_texts, train_labels, val_texts, val_labels,
                    learning_rate=0.01, l2=1e-6, max_epochs=200, patience=20, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train_linear(
    train_texts: Vec<String>,
    train_labels: Vec<u8>,
    val_texts: Vec<String>,
    val_labels: Vec<u8>,
    learning_rate: f64,
    l2: f64,
    max_epochs: u32,
    patience: u32,
    seed: u64,
) -> PyResult<LinearModel> {
    check_labels(&train_texts, &train_labels)?;
    check_labels(&val_texts, &val_labels)?;
    let train_streams = streams_of(&train_texts, &train_labels);
    let only: Vec<TokenStream> = train_streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&only).map_err(err)?;
    let train_counts = labeled_counts(&train_streams, &vocab);
    let val_counts = labeled_counts(&streams_of(&val_texts, &val_labels), &vocab);
    let hyper = LinearHyper {
        learning_rate,
        l2,
        max_epochs,
        patience,
        seed,
    };
    let model =
        classifiers::train_linear(&vocab, &train_counts, &val_counts, &hyper).map_err(err)?;
    Ok(LinearModel { model, vocab })
}

/// Train L2-regularised logistic regression (batch descent, no holdout).
#[pyfunction]
#[pyo3(signature = (texts, labels, l2=1e-6, max_iters=500, tol=1e-6, seed=0))]
fn train_logreg(
    texts: Vec<String>,
    labels: Vec<u8>,
    l2: f64,
    max_iters: u32,
    tol: f64,
    seed: u64,
) -> PyResult<LinearModel> {
    check_labels(&texts, &labels)?;
    let streams = streams_of(&texts, &labels);
    let only: Vec<TokenStream> = streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&only).map_err(err)?;
    let counts = labeled_counts(&streams, &vocab);
    let hyper = LogRegHyper {
        l2,
        max_iters,
        tol,
        seed,
    };
    let model = classifiers::train_logreg(&vocab, &counts, &hyper).map_err(err)?;
    Ok(LinearModel { model, vocab })
}

/// Train multinomial Naive Bayes with Laplace smoothing.
#[pyfunction]
#[pyo3(signature = (texts, labels, alpha=1.0))]
fn train_nb(texts: Vec<String>, labels: Vec<u8>, alpha: f64) -> PyResult<NbModel> {
    check_labels(&texts, &labels)?;
    let streams = streams_of(&texts, &labels);
    let only: Vec<TokenStream> = streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&only).map_err(err)?;
    let counts = labeled_counts(&streams, &vocab);
    let model = classifiers::train_nb(&vocab, &counts, alpha).map_err(err)?;
    Ok(NbModel { model, vocab })
}

#[pymodule]
fn veridict_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_punctuation, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(clean_source, m)?)?;
    m.add_function(wrap_pyfunction!(chunk_text, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_curve, m)?)?;
    m.add_function(wrap_pyfunction!(letter_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(feature_stats, m)?)?;
    m.add_function(wrap_pyfunction!(salient_features, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(split_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(train_linear, m)?)?;
    m.add_function(wrap_pyfunction!(train_logreg, m)?)?;
    m.add_function(wrap_pyfunction!(train_nb, m)?)?;
    m.add_class::<LinearModel>()?;
    m.add_class::<NbModel>()?;
    Ok(())
}
