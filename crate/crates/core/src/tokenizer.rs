//! Inclusive unigram tokeniser.
//!
//! Keeps original casing, emits punctuation marks as standalone tokens, and
//! folds the Unicode quote and dash variants onto their ASCII forms first so
//! that typography cannot leak class identity. Intra-word hyphens (`to-day`)
//! and apostrophes (`don't`), plus a fixed list of leading-apostrophe
//! elisions (`'em`), stay inside a single token.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An ordered token sequence for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub source_id: String,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>, source_id: impl Into<String>) -> Self {
        Self {
            tokens,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Leading-apostrophe contractions kept as single tokens (`'em`, `'tis`, ...).
/// Matched case-insensitively against the letters after the apostrophe.
const ELISIONS: &[&str] = &["em", "tis", "twas", "im", "er", "un", "ere"];

/// Fold quote and dash variants onto `'`, `"` and `-`; leave everything else
/// untouched. Idempotent.
pub fn normalize_punctuation(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' | '\u{201B}' => '\'',
            '\u{201C}' | '\u{201D}' | '\u{201F}' | '\u{00AB}' | '\u{00BB}' => '"',
            '\u{2010}'..='\u{2015}' | '\u{2212}' => '-',
            c => c,
        })
        .collect()
}

/// Tokenise `text`: normalise punctuation, then split into maximal
/// alphanumeric runs (with `'` and `-` retained when they sit between
/// alphanumerics, and listed elisions like `'em` kept whole) and
/// single-character punctuation tokens. Whitespace is discarded.
pub fn tokenize(text: &str) -> TokenStream {
    let normalized = normalize_punctuation(text);
    let chars: Vec<char> = normalized.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let start = i;
            i = scan_word(&chars, i);
            tokens.push(chars[start..i].iter().collect());
        } else if c == '\'' {
            if let Some(end) = match_elision(&chars, i) {
                tokens.push(chars[i..end].iter().collect());
                i = end;
            } else {
                tokens.push(c.to_string());
                i += 1;
            }
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }

    TokenStream::new(tokens, "")
}

/// Advance past an alphanumeric run starting at `i`, swallowing `'` or `-`
/// only when the next character is alphanumeric again.
fn scan_word(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            i += 1;
        } else if (c == '\'' || c == '-') && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()) {
            i += 2;
        } else {
            break;
        }
    }
    i
}

/// If the apostrophe at `i` starts a listed elision, return the index just
/// past it. The letter run must be maximal so `'ember` is not mistaken for
/// `'em`.
fn match_elision(chars: &[char], i: usize) -> Option<usize> {
    let mut end = i + 1;
    while end < chars.len() && chars[end].is_alphanumeric() {
        end += 1;
    }
    if end == i + 1 {
        return None;
    }
    let run: String = chars[i + 1..end].iter().collect::<String>().to_lowercase();
    ELISIONS.contains(&run.as_str()).then_some(end)
}

/// Case-folded relative frequency of the letters a-z across a corpus.
/// Errors when the corpus contains no such letters.
pub fn letter_distribution(corpus: &[TokenStream]) -> Result<Vec<(char, f64)>> {
    let mut counts = [0u64; 26];
    for stream in corpus {
        for token in &stream.tokens {
            for c in token.chars().flat_map(|c| c.to_lowercase()) {
                if c.is_ascii_lowercase() {
                    counts[(c as u8 - b'a') as usize] += 1;
                }
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoLetters);
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &n)| ((b'a' + i as u8) as char, n as f64 / total as f64))
        .collect())
}

/// Token count per token string, preserving nothing about order. Shared by
/// the feature and entropy code paths.
pub fn count_tokens<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> HashMap<&'a str, u64> {
    let mut counts = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).tokens
    }

    #[test]
    fn folds_quote_and_dash_variants() {
        assert_eq!(
            normalize_punctuation("\u{201C}Hello\u{201D}\u{2014}she said"),
            "\"Hello\"-she said"
        );
        assert_eq!(normalize_punctuation("don\u{2019}t"), "don't");
        assert_eq!(
            normalize_punctuation("a \u{2013} b \u{2212} c"),
            "a - b - c"
        );
    }

    #[test]
    fn normalization_leaves_ascii_alone() {
        let ascii = "He said, 'go!' -- then left (quickly).";
        assert_eq!(normalize_punctuation(ascii), ascii);
    }

    #[test]
    fn normalization_is_idempotent() {
        let text = "\u{2018}mixed\u{2019} \u{00AB}quotes\u{00BB} \u{2012} dashes";
        let once = normalize_punctuation(text);
        assert_eq!(normalize_punctuation(&once), once);
    }

    #[test]
    fn splits_words_and_punctuation() {
        assert_eq!(
            toks("He said, 'Hello'."),
            vec!["He", "said", ",", "'", "Hello", "'", "."]
        );
    }

    #[test]
    fn keeps_intra_word_hyphens_and_apostrophes() {
        assert_eq!(toks("to-day"), vec!["to-day"]);
        assert_eq!(toks("don't"), vec!["don't"]);
        assert_eq!(toks("don\u{2019}t"), vec!["don't"]);
    }

    #[test]
    fn keeps_listed_elisions_whole() {
        assert_eq!(toks("give 'em time"), vec!["give", "'em", "time"]);
        assert_eq!(toks("'Twas night"), vec!["'Twas", "night"]);
        // A maximal run that merely starts like an elision is a quote.
        assert_eq!(toks("'ember"), vec!["'", "ember"]);
    }

    #[test]
    fn empty_text_gives_empty_stream() {
        assert!(toks("").is_empty());
        assert!(toks("   \n\t ").is_empty());
    }

    #[test]
    fn preserves_casing() {
        assert_eq!(toks("The THE the"), vec!["The", "THE", "the"]);
    }

    #[test]
    fn trailing_apostrophe_is_a_quote() {
        assert_eq!(toks("rollin' round"), vec!["rollin", "'", "round"]);
    }

    #[test]
    fn dashes_follow_the_intra_word_rule() {
        // An em dash folded between alphanumerics reads as an intra-word
        // hyphen; one between spaces stands alone.
        assert_eq!(toks("with\u{2014}it"), vec!["with-it"]);
        assert_eq!(toks("so \u{2014} then"), vec!["so", "-", "then"]);
    }

    #[test]
    fn letter_distribution_counts_case_folded() {
        let corpus = vec![tokenize("aAb")];
        let dist = letter_distribution(&corpus).unwrap();
        let get = |c: char| dist.iter().find(|(l, _)| *l == c).unwrap().1;
        assert!((get('a') - 2.0 / 3.0).abs() < 1e-12);
        assert!((get('b') - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(get('z'), 0.0);
    }

    #[test]
    fn letter_distribution_errors_without_letters() {
        let corpus = vec![tokenize("123 !?")];
        assert!(matches!(
            letter_distribution(&corpus),
            Err(Error::NoLetters)
        ));
    }

    #[test]
    fn identical_corpora_give_identical_distributions() {
        let a = vec![tokenize("The quick brown fox.")];
        let b = vec![tokenize("The quick brown fox.")];
        assert_eq!(
            letter_distribution(&a).unwrap(),
            letter_distribution(&b).unwrap()
        );
    }

    proptest! {
        #[test]
        fn retokenization_fixpoint(text in "\\PC{0,200}") {
            let first = tokenize(&text).tokens;
            let joined = first.join(" ");
            prop_assert_eq!(tokenize(&joined).tokens, first);
        }

        #[test]
        fn tokens_never_empty_or_spaced(text in "\\PC{0,200}") {
            for t in tokenize(&text).tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn normalize_idempotent(text in "\\PC{0,200}") {
            let once = normalize_punctuation(&text);
            prop_assert_eq!(normalize_punctuation(&once), once.clone());
        }
    }
}
