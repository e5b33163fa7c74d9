//! Detect LLM-rewritten fiction with transparent unigram classifiers.
//!
//! The pipeline: clean raw novel text, chunk it into ~100-word excerpts,
//! rewrite each excerpt through a chat-completion endpoint to obtain the
//! machine-written counterpart, tokenise, train linear / Naive Bayes /
//! logistic-regression classifiers on unigram counts, and then explain the
//! verdicts token by token. Analysis helpers cover per-class feature
//! frequencies, salient-feature selection, ablation curves, and Shannon
//! entropy of the two corpora.

pub mod analysis;
pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod explain;
pub mod features;
pub mod pipeline;
pub mod rewrite;
pub mod synth;
pub mod tokenizer;

pub use error::{Error, Result};
