//! Quantitative analyses over trained models and corpora: Shannon entropy
//! curves per class, feature-removal ablation curves, and the manual
//! annotation-code workflow.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::{weights_accuracy, LinearModel};
use crate::error::{Error, Result};
use crate::features::{CountVector, FeatureStats, SalientSubset, Vocabulary};

/// Shannon entropy in bits, `H = -sum p(t) log2 p(t)`, with `p` the
/// empirical relative frequency within the sample.
///
/// Counts are summed in sorted order, so the result is exactly invariant
/// under permutation of the token list.
pub fn shannon_entropy<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyTokenList);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_insert(0) += 1;
    }
    let mut counts: Vec<u64> = counts.into_values().collect();
    counts.sort_unstable();
    Ok(entropy_from_sorted_counts(&counts, tokens.len() as u64))
}

fn entropy_from_sorted_counts(counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    -counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Entropy of growing prefixes of one class's token stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySeries {
    pub class_label: u8,
    /// `(token_count, bits)` with strictly increasing token counts.
    pub points: Vec<(u64, f64)>,
    /// Entropy over the full stream.
    pub total_bits: f64,
}

/// Compute the entropy of each prefix of length `step`, `2*step`, ... up to
/// the full stream, which is always the final point.
pub fn entropy_curve<S: AsRef<str>>(
    class_label: u8,
    class_tokens: &[S],
    step: usize,
) -> Result<EntropySeries> {
    if step == 0 {
        return Err(Error::Config("entropy step must be >= 1".into()));
    }
    if class_tokens.is_empty() {
        return Err(Error::EmptyTokenList);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut points = Vec::new();
    let mut consumed = 0u64;
    for (i, token) in class_tokens.iter().enumerate() {
        *counts.entry(token.as_ref()).or_insert(0) += 1;
        consumed = (i + 1) as u64;
        if (i + 1).is_multiple_of(step) && (i + 1) < class_tokens.len() {
            points.push((consumed, snapshot_entropy(&counts, consumed)));
        }
    }
    let total = snapshot_entropy(&counts, consumed);
    points.push((consumed, total));
    Ok(EntropySeries {
        class_label,
        points,
        total_bits: total,
    })
}

fn snapshot_entropy(counts: &HashMap<&str, u64>, total: u64) -> f64 {
    let mut values: Vec<u64> = counts.values().copied().collect();
    values.sort_unstable();
    entropy_from_sorted_counts(&values, total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyGap {
    /// `total_bits(class 1) - total_bits(class 0)`.
    pub gap_bits: f64,
    /// `2^gap`: the relative spread in effective vocabulary use.
    pub variation_ratio: f64,
}

pub fn entropy_gap_report(series0: &EntropySeries, series1: &EntropySeries) -> EntropyGap {
    let gap = series1.total_bits - series0.total_bits;
    EntropyGap {
        gap_bits: gap,
        variation_ratio: gap.exp2(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Zero the weight of every feature in descending-frequency order.
    ByFrequency,
    /// Walk the same order but zero only features whose weight magnitude
    /// reaches the threshold.
    ByFrequencyWeightFiltered,
}

/// Accuracy trace of a feature-removal walk. `accuracies[0]` is the
/// unablated baseline; entry `k` is the accuracy after `k` removals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub mode: AblationMode,
    pub removed: Vec<u32>,
    pub accuracies: Vec<f64>,
    pub weight_threshold: Option<f64>,
    /// Set when fewer than the requested number of features were eligible.
    pub truncated: bool,
}

/// Zero feature weights one at a time in descending order of combined
/// relative frequency `f0 + f1` (ties broken by token order) and record the
/// test accuracy after every removal. The passed model is never mutated.
pub fn ablation_curve(
    model: &LinearModel,
    test: &[(CountVector, u8)],
    stats: &FeatureStats,
    n: usize,
    weight_threshold: Option<f64>,
) -> Result<AblationResult> {
    if stats.vocab_hash != model.vocab_hash {
        return Err(Error::VocabularyMismatch {
            expected: model.vocab_hash.clone(),
            found: stats.vocab_hash.clone(),
        });
    }
    if test.is_empty() {
        return Err(Error::Config("ablation needs a non-empty test set".into()));
    }

    // Vocabulary order is lexicographic, so breaking frequency ties by
    // ascending index is the documented lexicographic tie-break.
    let mut order: Vec<u32> = (0..stats.len() as u32).collect();
    order.sort_by(|&a, &b| {
        stats
            .f_sum(b)
            .partial_cmp(&stats.f_sum(a))
            .unwrap()
            .then_with(|| a.cmp(&b))
    });

    let mut weights = model.weights.clone();
    let mut removed = Vec::with_capacity(n);
    let mut accuracies = vec![weights_accuracy(&weights, model.bias, test)];

    for &feature in &order {
        if removed.len() == n {
            break;
        }
        if let Some(threshold) = weight_threshold {
            if model.weights[feature as usize].abs() < threshold {
                continue;
            }
        }
        weights[feature as usize] = 0.0;
        removed.push(feature);
        accuracies.push(weights_accuracy(&weights, model.bias, test));
    }

    Ok(AblationResult {
        mode: if weight_threshold.is_some() {
            AblationMode::ByFrequencyWeightFiltered
        } else {
            AblationMode::ByFrequency
        },
        truncated: removed.len() < n,
        removed,
        accuracies,
        weight_threshold,
    })
}

/// Render an ablation trace as a two-column CSV (`removals,accuracy`).
pub fn ablation_csv(result: &AblationResult) -> String {
    let mut out = String::from("removals,accuracy\n");
    for (k, acc) in result.accuracies.iter().enumerate() {
        out.push_str(&format!("{k},{acc}\n"));
    }
    out
}

/// Render an entropy series as a two-column CSV (`tokens,bits`).
pub fn entropy_csv(series: &EntropySeries) -> String {
    let mut out = String::from("tokens,bits\n");
    for (n, bits) in &series.points {
        out.push_str(&format!("{n},{bits}\n"));
    }
    out
}

/// The explanation codes of the manual annotation workflow.
pub const ANNOTATION_CODES: &[&str] = &[
    "E1.1", "E1.2", "E1.3", "E1.4", "E1.5", "E1.6", "E1.7", "E2", "E3", "E4", "E5",
];

/// One hand-annotated feature: the token, its explanation codes, and a free
/// note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub token: String,
    pub codes: Vec<String>,
    pub note: String,
}

/// Parse the hand-edited annotation file: one `token<TAB>codes<TAB>note`
/// line per feature, codes comma-separated, `#` comments and a `token`
/// header allowed.
pub fn load_annotations(text: &str) -> Result<Vec<AnnotationEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') || raw.starts_with("token\t") {
            continue;
        }
        let mut fields = raw.split('\t');
        let token = fields
            .next()
            .filter(|t| !t.is_empty())
            .ok_or(Error::BadAnnotationLine {
                line,
                detail: "missing token".into(),
            })?
            .to_string();
        let codes_field = fields.next().unwrap_or("").trim();
        if codes_field.is_empty() {
            return Err(Error::BadAnnotationLine {
                line,
                detail: "at least one code is required".into(),
            });
        }
        let mut codes = Vec::new();
        for code in codes_field.split(',') {
            let code = code.trim();
            if !ANNOTATION_CODES.contains(&code) {
                return Err(Error::UnknownAnnotationCode {
                    code: code.into(),
                    line,
                });
            }
            codes.push(code.to_string());
        }
        let note = fields.next().unwrap_or("").trim().to_string();
        entries.push(AnnotationEntry { token, codes, note });
    }
    Ok(entries)
}

/// One row of the joined annotation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedRow {
    pub token: String,
    pub f0: f64,
    pub f1: f64,
    pub ratio: f64,
    pub weight: f64,
    pub codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedTable {
    pub rows: Vec<AnnotatedRow>,
    /// Instance count per code. A token carrying several codes contributes
    /// to each of them, so the counts need not sum to the subset size.
    pub code_counts: Vec<(String, usize)>,
    pub warnings: Vec<String>,
}

/// Join annotations against the salient subset, stats and model weights.
/// Tokens outside the subset (or unknown to the vocabulary) produce
/// warnings, not errors.
pub fn join_annotations(
    entries: &[AnnotationEntry],
    salient: &SalientSubset,
    stats: &FeatureStats,
    model: &LinearModel,
    vocab: &Vocabulary,
) -> AnnotatedTable {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut code_counts: Vec<(String, usize)> = ANNOTATION_CODES
        .iter()
        .map(|c| (c.to_string(), 0))
        .collect();
    for entry in entries {
        let Some(idx) = vocab.index_of(&entry.token) else {
            warnings.push(format!("token `{}` is not in the vocabulary", entry.token));
            continue;
        };
        if !salient.contains(idx) {
            warnings.push(format!(
                "token `{}` is outside the salient subset",
                entry.token
            ));
        }
        for code in &entry.codes {
            if let Some(slot) = code_counts.iter_mut().find(|(c, _)| c == code) {
                slot.1 += 1;
            }
        }
        rows.push(AnnotatedRow {
            token: entry.token.clone(),
            f0: stats.f0[idx as usize],
            f1: stats.f1[idx as usize],
            ratio: stats.ratio(idx),
            weight: model.weights[idx as usize],
            codes: entry.codes.clone(),
        });
    }
    AnnotatedTable {
        rows,
        code_counts,
        warnings,
    }
}

/// Render the joined table as TSV for inspection.
pub fn annotated_table_tsv(table: &AnnotatedTable) -> String {
    let mut out = String::from("token\tf0\tf1\tR\tweight\tcodes\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            row.token,
            row.f0,
            row.f1,
            row.ratio,
            row.weight,
            row.codes.join(",")
        ));
    }
    out.push('\n');
    out.push_str("code\tN\n");
    for (code, n) in &table.code_counts {
        out.push_str(&format!("{code}\t{n}\n"));
    }
    out
}
