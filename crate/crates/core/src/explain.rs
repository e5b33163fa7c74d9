//! Token-level explanation views and the HTML report that renders them.
//!
//! Every token is shown with a background tint: one colour for negative
//! weights (human-leaning) and another for positive weights (LLM-leaning),
//! with opacity proportional to the weight magnitude normalised by the
//! model's 99th-percentile |w| and clipped at 1. The per-token
//! contributions sum to the displayed score exactly.

use serde::{Deserialize, Serialize};

use crate::analysis::AnnotationEntry;
use crate::classifiers::{class_from_score, LinearModel};
use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::tokenizer::TokenStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainedToken {
    pub token: String,
    /// Model weight; 0 for out-of-vocabulary tokens.
    pub weight: f64,
    /// Contribution of this occurrence (equal to the weight for unigrams).
    pub contribution: f64,
    pub codes: Vec<String>,
}

/// One document's verdict broken down token by token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationView {
    pub sample_id: String,
    pub tokens: Vec<ExplainedToken>,
    pub total_score: f64,
    pub bias: f64,
    pub predicted: u8,
    pub true_label: Option<u8>,
}

/// Pair every token of `doc` with its weight and contribution, in document
/// order. The total is the bias plus the contributions summed in that same
/// order, so the explanation is exact by construction.
pub fn explain_document(
    model: &LinearModel,
    vocab: &Vocabulary,
    doc: &TokenStream,
    true_label: Option<u8>,
) -> Result<ExplanationView> {
    let vocab_hash = vocab.hash();
    if model.vocab_hash != vocab_hash {
        return Err(Error::VocabularyMismatch {
            expected: model.vocab_hash.clone(),
            found: vocab_hash,
        });
    }
    let mut tokens = Vec::with_capacity(doc.tokens.len());
    let mut total = model.bias;
    for token in &doc.tokens {
        let weight = vocab
            .index_of(token)
            .map(|i| model.weights[i as usize])
            .unwrap_or(0.0);
        total += weight;
        tokens.push(ExplainedToken {
            token: token.clone(),
            weight,
            contribution: weight,
            codes: Vec::new(),
        });
    }
    Ok(ExplanationView {
        sample_id: doc.source_id.clone(),
        tokens,
        total_score: total,
        bias: model.bias,
        predicted: class_from_score(total),
        true_label,
    })
}

/// Attach annotation codes to every matching token of a view.
pub fn annotate_view(view: &mut ExplanationView, annotations: &[AnnotationEntry]) {
    for t in &mut view.tokens {
        for entry in annotations {
            if entry.token == t.token {
                t.codes = entry.codes.clone();
            }
        }
    }
}

/// Colour scheme for the report; override for colour-vision accessibility.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Background for negative weights (class 0, human-leaning).
    pub negative_rgb: (u8, u8, u8),
    /// Background for positive weights (class 1, LLM-leaning).
    pub positive_rgb: (u8, u8, u8),
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            negative_rgb: (245, 197, 66), // yellow
            positive_rgb: (155, 89, 182), // purple
        }
    }
}

/// The 99th-percentile weight magnitude (nearest rank); the saturation
/// normaliser. Falls back to the maximum magnitude, then to 1, when the
/// percentile is zero.
pub fn weight_scale(model: &LinearModel) -> f64 {
    let mut magnitudes: Vec<f64> = model.weights.iter().map(|w| w.abs()).collect();
    if magnitudes.is_empty() {
        return 1.0;
    }
    magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((0.99 * magnitudes.len() as f64).ceil() as usize).clamp(1, magnitudes.len());
    let p99 = magnitudes[rank - 1];
    if p99 > 0.0 {
        p99
    } else if *magnitudes.last().unwrap() > 0.0 {
        *magnitudes.last().unwrap()
    } else {
        1.0
    }
}

/// Opacity for a weight under a given scale: `min(1, |w| / scale)`.
pub fn saturation(weight: f64, scale: f64) -> f64 {
    (weight.abs() / scale).min(1.0)
}

/// Render a self-contained HTML report for the given views. Views are laid
/// out two per row so human/LLM pairs sit side by side. Deterministic:
/// identical inputs produce identical bytes.
pub fn render_report(
    model: &LinearModel,
    views: &[ExplanationView],
    annotations: Option<&[AnnotationEntry]>,
    options: &RenderOptions,
) -> Result<String> {
    if views.is_empty() {
        return Err(Error::Config("no explanation views to render".into()));
    }
    let scale = weight_scale(model);
    let (nr, ng, nb) = options.negative_rgb;
    let (pr, pg, pb) = options.positive_rgb;

    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>Token-level classification report</title>\n<style>\n");
    html.push_str(concat!(
        "body { font-family: Georgia, serif; margin: 2rem; color: #1a1a1a; }\n",
        "h1 { font-size: 1.3rem; }\n",
        ".legend { font-size: 0.85rem; color: #444; margin-bottom: 1.5rem; }\n",
        ".legend span { padding: 0 0.4em; }\n",
        ".views { display: flex; flex-wrap: wrap; gap: 1.5rem; }\n",
        ".view { flex: 1 1 28rem; max-width: 42rem; border: 1px solid #ccc; ",
        "border-radius: 6px; padding: 1rem; }\n",
        ".view header { font-size: 0.8rem; color: #555; margin-bottom: 0.75rem; ",
        "border-bottom: 1px solid #eee; padding-bottom: 0.5rem; }\n",
        ".text { line-height: 2.1; }\n",
        ".tok { border-radius: 2px; padding: 0 1px; position: relative; ",
        "display: inline-block; }\n",
        ".code { position: absolute; top: -1.05em; left: 0; font-size: 0.55em; ",
        "color: #333; white-space: nowrap; font-family: sans-serif; }\n",
        ".score { font-size: 0.8rem; color: #555; margin-top: 0.75rem; ",
        "border-top: 1px solid #eee; padding-top: 0.5rem; }\n",
    ));
    html.push_str("</style>\n</head>\n<body>\n<h1>Token-level classification report</h1>\n");
    html.push_str(&format!(
        "<p class=\"legend\"><span style=\"background: rgb({nr},{ng},{nb})\">negative weight \
         (class 0, human)</span> <span style=\"background: rgb({pr},{pg},{pb}); color: #fff\">\
         positive weight (class 1, LLM)</span> &middot; saturation scales with |w| / {scale:.4}</p>\n",
    ));
    html.push_str("<div class=\"views\">\n");

    for view in views {
        let mut view = view.clone();
        if let Some(entries) = annotations {
            annotate_view(&mut view, entries);
        }
        html.push_str("<section class=\"view\">\n<header>");
        html.push_str(&format!(
            "sample <strong>{}</strong> &middot; predicted class {}",
            escape(&view.sample_id),
            view.predicted
        ));
        if let Some(label) = view.true_label {
            html.push_str(&format!(" &middot; true class {label}"));
        }
        html.push_str("</header>\n<p class=\"text\">");
        for t in &view.tokens {
            let alpha = saturation(t.weight, scale);
            let style = if t.weight == 0.0 {
                String::new()
            } else if t.weight < 0.0 {
                format!(" style=\"background: rgba({nr},{ng},{nb},{alpha:.3})\"")
            } else {
                format!(" style=\"background: rgba({pr},{pg},{pb},{alpha:.3})\"")
            };
            let code = if t.codes.is_empty() {
                String::new()
            } else {
                format!("<span class=\"code\">{}</span>", escape(&t.codes.join(",")))
            };
            html.push_str(&format!(
                "<span class=\"tok\"{style} title=\"w={:+.4}\">{code}{}</span> ",
                t.weight,
                escape(&t.token)
            ));
        }
        html.push_str("</p>\n");
        html.push_str(&format!(
            "<p class=\"score\">bias {:+.4} &plus; contributions = score {:+.4}</p>\n</section>\n",
            view.bias, view.total_score
        ));
    }

    html.push_str("</div>\n</body>\n</html>\n");
    Ok(html)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}
