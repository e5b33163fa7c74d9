//! Chunk cleaned text into excerpts that always end on a full stop.
//!
//! Each excerpt greedily packs whole sentences up to a per-chunk target
//! length drawn uniformly from `[min_words, max_words]`, counting
//! space-delimited words. A sentence too long to fit even an empty excerpt
//! is emitted alone; if it exceeds `max_words` it is flagged oversize.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::count_words;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_WORDS: usize = 92;
pub const DEFAULT_MAX_WORDS: usize = 125;

/// Words that end with a period without ending a sentence. The list is a
/// parameter because no canonical list exists.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["Mr", "Mrs", "Dr", "St"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Excerpt {
    pub text: String,
    pub word_count: usize,
    /// Set when a lone sentence exceeded the maximum target length.
    pub oversize: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkOutcome {
    pub excerpts: Vec<Excerpt>,
    /// Number of oversize excerpts, reported as a warning count.
    pub oversize_count: usize,
    /// Trailing text after the last full stop, which no excerpt may contain.
    pub discarded_tail: Option<String>,
}

/// Split text into sentences on the rule: a `.` followed by whitespace or
/// end of text ends a sentence, unless the word before it is a listed
/// abbreviation. Sentence-internal whitespace is collapsed to single
/// spaces. Returns the sentences plus any unterminated tail.
pub fn split_sentences(text: &str, abbreviations: &[&str]) -> (Vec<String>, Option<String>) {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    for i in 0..chars.len() {
        if chars[i] != '.' {
            continue;
        }
        let at_boundary = match chars.get(i + 1) {
            None => true,
            Some(c) => c.is_whitespace(),
        };
        if !at_boundary || is_abbreviation(&chars[start..i], abbreviations) {
            continue;
        }
        let sentence = normalize_ws(&chars[start..=i].iter().collect::<String>());
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
        start = i + 1;
    }
    let tail = normalize_ws(&chars[start..].iter().collect::<String>());
    (sentences, (!tail.is_empty()).then_some(tail))
}

fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Does the text before a period end in a listed abbreviation?
fn is_abbreviation(before: &[char], abbreviations: &[&str]) -> bool {
    let word: String = before
        .iter()
        .rev()
        .take_while(|c| c.is_alphanumeric())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    abbreviations.contains(&word.as_str())
}

/// Chunk with targets drawn uniformly from `[min_words, max_words]` by a
/// seeded generator; one draw per emitted excerpt.
pub fn chunk_text(
    clean_text: &str,
    min_words: usize,
    max_words: usize,
    seed: u64,
) -> Result<ChunkOutcome> {
    if clean_text.trim().is_empty() {
        return Err(Error::NoNarrativeContent);
    }
    if min_words == 0 || min_words > max_words {
        return Err(Error::Config(format!(
            "bad chunk target range [{min_words}, {max_words}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chunk_with_targets(clean_text, max_words, DEFAULT_ABBREVIATIONS, move || {
        rng.random_range(min_words..=max_words)
    })
}

/// Chunk with an explicit target source; the deterministic core of
/// [`chunk_text`], also handy for tests.
pub fn chunk_with_targets(
    clean_text: &str,
    max_words: usize,
    abbreviations: &[&str],
    mut next_target: impl FnMut() -> usize,
) -> Result<ChunkOutcome> {
    let (sentences, discarded_tail) = split_sentences(clean_text, abbreviations);
    let mut excerpts = Vec::new();
    let mut oversize_count = 0;
    let mut i = 0;

    while i < sentences.len() {
        let target = next_target();
        let mut words = 0usize;
        let mut parts: Vec<&str> = Vec::new();
        while i < sentences.len() {
            let wc = count_words(&sentences[i]);
            if !parts.is_empty() && words + wc > target {
                break;
            }
            if parts.is_empty() && wc > target {
                // The first sentence alone overshoots the target: emit it on
                // its own rather than stall.
                parts.push(&sentences[i]);
                words = wc;
                i += 1;
                break;
            }
            parts.push(&sentences[i]);
            words += wc;
            i += 1;
        }
        let oversize = words > max_words;
        if oversize {
            oversize_count += 1;
        }
        excerpts.push(Excerpt {
            text: parts.join(" "),
            word_count: words,
            oversize,
        });
    }

    Ok(ChunkOutcome {
        excerpts,
        oversize_count,
        discarded_tail,
    })
}
