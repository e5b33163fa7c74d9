//! Unigram feature space: vocabulary, count vectors, per-class relative
//! frequencies and the salient-feature subset.
//!
//! Frequencies are instances per million tokens within one class of the
//! training corpus. A feature's `f_max` is the larger of its two class
//! frequencies and its ratio `R` is `f_max / (f0 + f1)`, so `R` close to 1
//! marks a feature concentrated in a single class.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tokenizer::TokenStream;

/// Ordered token -> index map built from the training split only.
/// Tokens are ordered lexicographically by byte sequence, which makes the
/// order reproducible across runs and platforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Collect the distinct tokens of the training split.
    pub fn build(train: &[TokenStream]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut tokens: Vec<String> = train
            .iter()
            .flat_map(|s| s.tokens.iter().cloned())
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        Ok(Self::from_sorted(tokens))
    }

    /// Rebuild a vocabulary from tokens that are already unique. Used when
    /// loading model files, which store tokens in vocabulary order.
    pub fn from_tokens(mut tokens: Vec<String>) -> Self {
        tokens.sort_unstable();
        tokens.dedup();
        Self::from_sorted(tokens)
    }

    fn from_sorted(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: u32) -> &str {
        &self.tokens[index as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// SHA-256 over the newline-joined token list; identifies the feature
    /// space a model was trained against.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Sparse bag-of-words vector. Out-of-vocabulary tokens count towards
/// `total_tokens` but are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    /// (feature index, count) pairs sorted by index; counts are >= 1.
    pub entries: Vec<(u32, u32)>,
    pub total_tokens: u32,
}

impl CountVector {
    pub fn stored_count(&self) -> u32 {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

/// Count the in-vocabulary tokens of one document.
pub fn vectorize(doc: &TokenStream, vocab: &Vocabulary) -> CountVector {
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for token in &doc.tokens {
        if let Some(idx) = vocab.index_of(token) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(u32, u32)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(idx, _)| idx);
    CountVector {
        entries,
        total_tokens: doc.tokens.len() as u32,
    }
}

/// Per-feature class-relative frequencies over the training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    /// Instances per million tokens in class 0, indexed by feature.
    pub f0: Vec<f64>,
    /// Instances per million tokens in class 1, indexed by feature.
    pub f1: Vec<f64>,
    /// In-vocabulary token totals per class (the per-million denominators).
    pub class_tokens: [u64; 2],
    pub vocab_hash: String,
}

impl FeatureStats {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn f_max(&self, i: u32) -> f64 {
        self.f0[i as usize].max(self.f1[i as usize])
    }

    /// Combined relative frequency, the ordering key of the ablation walk.
    pub fn f_sum(&self, i: u32) -> f64 {
        self.f0[i as usize] + self.f1[i as usize]
    }

    /// Frequency ratio `R = f_max / (f0 + f1)`. A feature absent from both
    /// classes gets the neutral 0.5.
    pub fn ratio(&self, i: u32) -> f64 {
        let sum = self.f_sum(i);
        if sum > 0.0 {
            self.f_max(i) / sum
        } else {
            0.5
        }
    }
}

/// Compute `f_{i,j} = 1e6 * count of feature i in class j / in-vocabulary
/// token total of class j` over the training documents.
pub fn class_frequencies(train: &[(TokenStream, u8)], vocab: &Vocabulary) -> Result<FeatureStats> {
    let mut counts = [vec![0u64; vocab.len()], vec![0u64; vocab.len()]];
    let mut totals = [0u64; 2];
    for (stream, label) in train {
        let class = *label as usize;
        for token in &stream.tokens {
            if let Some(idx) = vocab.index_of(token) {
                counts[class][idx as usize] += 1;
                totals[class] += 1;
            }
        }
    }
    for label in 0..2u8 {
        if totals[label as usize] == 0 {
            return Err(Error::EmptyClassTokens { label });
        }
    }
    let per_million = |counts: &[u64], total: u64| {
        counts
            .iter()
            .map(|&c| 1e6 * c as f64 / total as f64)
            .collect()
    };
    Ok(FeatureStats {
        f0: per_million(&counts[0], totals[0]),
        f1: per_million(&counts[1], totals[1]),
        class_tokens: totals,
        vocab_hash: vocab.hash(),
    })
}

/// Feature ids passing both salience thresholds, with the thresholds kept
/// for the record.
#[derive(Debug, Clone, PartialEq)]
pub struct SalientSubset {
    /// Selected feature indices, ascending.
    pub features: Vec<u32>,
    pub threshold_f: f64,
    pub threshold_r: f64,
}

impl SalientSubset {
    pub fn contains(&self, feature: u32) -> bool {
        self.features.binary_search(&feature).is_ok()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

pub const DEFAULT_THRESHOLD_F: f64 = 100.0;
pub const DEFAULT_THRESHOLD_R: f64 = 0.75;

/// All and only the features with `f_max >= threshold_f` and
/// `R >= threshold_r` (closed thresholds).
pub fn select_salient(stats: &FeatureStats, threshold_f: f64, threshold_r: f64) -> SalientSubset {
    let features = (0..stats.len() as u32)
        .filter(|&i| stats.f_max(i) >= threshold_f && stats.ratio(i) >= threshold_r)
        .collect();
    SalientSubset {
        features,
        threshold_f,
        threshold_r,
    }
}

/// Render the stats as a tab-separated table `(token, f0, f1, f_max, R)`
/// sorted by `f_max` descending (ties by token). The first line records the
/// per-class token totals so the table round-trips.
pub fn export_stats_table(stats: &FeatureStats, vocab: &Vocabulary) -> String {
    let mut order: Vec<u32> = (0..stats.len() as u32).collect();
    order.sort_by(|&a, &b| {
        stats
            .f_max(b)
            .partial_cmp(&stats.f_max(a))
            .unwrap()
            .then_with(|| vocab.token(a).cmp(vocab.token(b)))
    });
    let mut out = format!(
        "# class0_tokens={} class1_tokens={}\ntoken\tf0\tf1\tf_max\tR\n",
        stats.class_tokens[0], stats.class_tokens[1]
    );
    for i in order {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            vocab.token(i),
            stats.f0[i as usize],
            stats.f1[i as usize],
            stats.f_max(i),
            stats.ratio(i)
        ));
    }
    out
}

/// Parse a table produced by [`export_stats_table`] back into stats aligned
/// with `vocab`. Tokens missing from the table get zero frequencies.
pub fn parse_stats_table(text: &str, vocab: &Vocabulary) -> Result<FeatureStats> {
    let mut stats = FeatureStats {
        f0: vec![0.0; vocab.len()],
        f1: vec![0.0; vocab.len()],
        class_tokens: [0, 0],
        vocab_hash: vocab.hash(),
    };
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with("token\t") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for part in rest.split_whitespace() {
                if let Some(v) = part.strip_prefix("class0_tokens=") {
                    stats.class_tokens[0] = v.parse().map_err(|_| bad_stats_line(lineno))?;
                } else if let Some(v) = part.strip_prefix("class1_tokens=") {
                    stats.class_tokens[1] = v.parse().map_err(|_| bad_stats_line(lineno))?;
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(bad_stats_line(lineno));
        }
        if let Some(idx) = vocab.index_of(fields[0]) {
            stats.f0[idx as usize] = fields[1].parse().map_err(|_| bad_stats_line(lineno))?;
            stats.f1[idx as usize] = fields[2].parse().map_err(|_| bad_stats_line(lineno))?;
        }
    }
    Ok(stats)
}

fn bad_stats_line(lineno: usize) -> Error {
    Error::Config(format!("malformed stats table line {}", lineno + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::tokenize;

    fn stream(tokens: &[&str]) -> TokenStream {
        TokenStream::new(tokens.iter().map(|t| t.to_string()).collect(), "")
    }

    #[test]
    fn vocabulary_is_the_distinct_token_set() {
        let train = vec![stream(&["a", "b"]), stream(&["b", "c"])];
        let vocab = Vocabulary::build(&train).unwrap();
        assert_eq!(vocab.len(), 3);
        assert_eq!(vocab.tokens(), &["a", "b", "c"]);
    }

    #[test]
    fn vocabulary_build_is_deterministic() {
        let train = vec![stream(&["z", "m", "a"]), stream(&["m", "q"])];
        let a = Vocabulary::build(&train).unwrap();
        let b = Vocabulary::build(&train).unwrap();
        assert_eq!(a.tokens(), b.tokens());
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert!(matches!(
            Vocabulary::build(&[]),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn vectorize_counts_and_tracks_oov() {
        let vocab = Vocabulary::build(&[stream(&["a", "b"])]).unwrap();
        let v = vectorize(&stream(&["a", "a", "b"]), &vocab);
        assert_eq!(v.total_tokens, 3);
        assert_eq!(v.entries.len(), 2);
        assert_eq!(v.stored_count(), 3);

        let oov = vectorize(&stream(&["z"]), &vocab);
        assert!(oov.entries.is_empty());
        assert_eq!(oov.total_tokens, 1);
    }

    #[test]
    fn vectorize_is_order_invariant() {
        let vocab = Vocabulary::build(&[stream(&["a", "b", "c"])]).unwrap();
        let v1 = vectorize(&stream(&["a", "b", "a", "c"]), &vocab);
        let v2 = vectorize(&stream(&["c", "a", "a", "b"]), &vocab);
        assert_eq!(v1, v2);
    }

    proptest::proptest! {
        #[test]
        fn count_vector_invariants_hold(
            vocab_tokens in proptest::collection::vec("[a-f]", 1..6),
            doc_tokens in proptest::collection::vec("[a-j]", 0..60),
        ) {
            let vocab = Vocabulary::build(&[TokenStream::new(vocab_tokens, "")]).unwrap();
            let doc = TokenStream::new(doc_tokens.clone(), "");
            let v = vectorize(&doc, &vocab);
            proptest::prop_assert_eq!(v.total_tokens as usize, doc_tokens.len());
            proptest::prop_assert!(v.stored_count() <= v.total_tokens);
            proptest::prop_assert!(v.entries.iter().all(|&(_, c)| c >= 1));
            proptest::prop_assert!(v.entries.windows(2).all(|w| w[0].0 < w[1].0));

            let mut reversed = doc_tokens;
            reversed.reverse();
            let v2 = vectorize(&TokenStream::new(reversed, ""), &vocab);
            proptest::prop_assert_eq!(v, v2);
        }
    }

    #[test]
    fn class_frequency_arithmetic() {
        // Class 0: one 10-token doc with two "said" -> f = 200,000 per million.
        let doc0 = stream(&["said", "said", "a", "b", "c", "d", "e", "f", "g", "h"]);
        let doc1 = stream(&["x", "y"]);
        let vocab = Vocabulary::build(&[doc0.clone(), doc1.clone()]).unwrap();
        let stats = class_frequencies(&[(doc0, 0), (doc1, 1)], &vocab).unwrap();
        let said = vocab.index_of("said").unwrap();
        assert!((stats.f0[said as usize] - 200_000.0).abs() < 1e-9);
        assert_eq!(stats.f1[said as usize], 0.0);
        assert_eq!(stats.ratio(said), 1.0);
    }

    #[test]
    fn even_features_have_ratio_half() {
        let doc0 = stream(&["said", "and"]);
        let doc1 = stream(&["said", "but"]);
        let vocab = Vocabulary::build(&[doc0.clone(), doc1.clone()]).unwrap();
        let stats = class_frequencies(&[(doc0, 0), (doc1, 1)], &vocab).unwrap();
        let said = vocab.index_of("said").unwrap();
        assert!((stats.ratio(said) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_from_unequal_frequencies() {
        let stats = FeatureStats {
            f0: vec![300.0],
            f1: vec![100.0],
            class_tokens: [1, 1],
            vocab_hash: String::new(),
        };
        assert_eq!(stats.f_max(0), 300.0);
        assert!((stats.ratio(0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_class_is_an_error() {
        let doc = stream(&["a"]);
        let vocab = Vocabulary::build(std::slice::from_ref(&doc)).unwrap();
        assert!(matches!(
            class_frequencies(&[(doc, 0)], &vocab),
            Err(Error::EmptyClassTokens { label: 1 })
        ));
    }

    #[test]
    fn duplicating_documents_leaves_frequencies_unchanged() {
        let doc0 = stream(&["said", "the", "cat"]);
        let doc1 = stream(&["remarked", "the", "cat"]);
        let vocab = Vocabulary::build(&[doc0.clone(), doc1.clone()]).unwrap();
        let once = class_frequencies(&[(doc0.clone(), 0), (doc1.clone(), 1)], &vocab).unwrap();
        let twice = class_frequencies(
            &[(doc0.clone(), 0), (doc1.clone(), 1), (doc0, 0), (doc1, 1)],
            &vocab,
        )
        .unwrap();
        for i in 0..once.len() as u32 {
            assert!((once.f0[i as usize] - twice.f0[i as usize]).abs() < 1e-9);
            assert!((once.f1[i as usize] - twice.f1[i as usize]).abs() < 1e-9);
        }
    }

    #[test]
    fn conservation_of_counts() {
        let docs = vec![
            (tokenize("He said it was late."), 0u8),
            (tokenize("She remarked that the hour was late."), 1u8),
            (tokenize("It was very, very dark."), 0u8),
        ];
        let streams: Vec<TokenStream> = docs.iter().map(|(s, _)| s.clone()).collect();
        let vocab = Vocabulary::build(&streams).unwrap();
        let stats = class_frequencies(&docs, &vocab).unwrap();
        for class in 0..2usize {
            let f = if class == 0 { &stats.f0 } else { &stats.f1 };
            let reconstructed: f64 = f
                .iter()
                .map(|x| x / 1e6 * stats.class_tokens[class] as f64)
                .sum();
            let expected = stats.class_tokens[class] as f64;
            assert!((reconstructed - expected).abs() < 1e-6 * expected);
        }
    }

    #[test]
    fn salient_thresholds_are_closed() {
        let stats = FeatureStats {
            f0: vec![99.0, 100.0, 500.0],
            f1: vec![0.0, 0.0, 490.0],
            class_tokens: [1, 1],
            vocab_hash: String::new(),
        };
        let subset = select_salient(&stats, 100.0, 0.75);
        // f_max 99 excluded, f_max 100 with R = 1 included, even feature excluded.
        assert_eq!(subset.features, vec![1]);
        assert!(subset.contains(1));
        assert!(!subset.contains(0));
    }

    #[test]
    fn salient_selection_is_monotone_under_tightening() {
        let stats = FeatureStats {
            f0: vec![50.0, 120.0, 300.0, 80.0],
            f1: vec![10.0, 30.0, 90.0, 80.0],
            class_tokens: [1, 1],
            vocab_hash: String::new(),
        };
        let loose = select_salient(&stats, 50.0, 0.6);
        let tight_f = select_salient(&stats, 150.0, 0.6);
        let tight_r = select_salient(&stats, 50.0, 0.8);
        for f in &tight_f.features {
            assert!(loose.contains(*f));
        }
        for f in &tight_r.features {
            assert!(loose.contains(*f));
        }
    }

    #[test]
    fn stats_table_round_trips() {
        let doc0 = stream(&["said", "the", "cat", "sat"]);
        let doc1 = stream(&["remarked", "the", "cat"]);
        let vocab = Vocabulary::build(&[doc0.clone(), doc1.clone()]).unwrap();
        let stats = class_frequencies(&[(doc0, 0), (doc1, 1)], &vocab).unwrap();
        let table = export_stats_table(&stats, &vocab);
        assert!(table.starts_with("# class0_tokens=4 class1_tokens=3\n"));
        let reparsed = parse_stats_table(&table, &vocab).unwrap();
        assert_eq!(reparsed, stats);
    }

    #[test]
    fn stats_table_sorted_by_f_max_desc() {
        let doc0 = stream(&["a", "a", "a", "b"]);
        let doc1 = stream(&["c", "c", "b", "b"]);
        let vocab = Vocabulary::build(&[doc0.clone(), doc1.clone()]).unwrap();
        let stats = class_frequencies(&[(doc0, 0), (doc1, 1)], &vocab).unwrap();
        let table = export_stats_table(&stats, &vocab);
        let first_data = table.lines().nth(2).unwrap();
        assert!(first_data.starts_with("a\t"));
    }
}
