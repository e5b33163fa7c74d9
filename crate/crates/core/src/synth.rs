//! Seeded synthetic corpus with two planted vocabulary distributions.
//!
//! Class 0 leans on one pool of marker tokens, class 1 on another, over a
//! shared filler vocabulary. The planted markers are what a trained model
//! must surface as its strongest weights, which makes the corpus a good
//! end-to-end smoke fixture that needs no external data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{count_words, Sample};

/// Markers planted into class-0 (human-leaning) texts.
pub const PLANT_CLASS0: &[&str] = &[
    "said", "very", "good", "little", "got", "quite", "fancy", "round", "look", "jolly",
];

/// Markers planted into class-1 (LLM-leaning) texts.
pub const PLANT_CLASS1: &[&str] = &[
    "remarked",
    "exquisite",
    "simply",
    "recalled",
    "toward",
    "exclaimed",
    "someone",
    "intend",
    "entrance",
    "unsettled",
];

const FILLER: &[&str] = &[
    "the", "a", "and", "of", "to", "in", "he", "she", "it", "was", "that", "his", "her", "with",
    "at", "on", "for", "had", "as", "not", "but", "they", "from", "house", "door", "night", "room",
    "man", "woman", "case", "time", "eyes", "hand", "voice", "word",
];

/// Generate `n_pairs` class-0/class-1 sample pairs, deterministically for a
/// fixed seed. Ids are `syn-<k>` and `rw-syn-<k>`.
pub fn synthetic_pairs(n_pairs: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_pairs * 2);
    for k in 0..n_pairs {
        let id = format!("syn-{k:04}");
        let text0 = synth_text(&mut rng, PLANT_CLASS0, PLANT_CLASS1);
        let text1 = synth_text(&mut rng, PLANT_CLASS1, PLANT_CLASS0);
        samples.push(Sample {
            id: id.clone(),
            word_count: count_words(&text0),
            text: text0,
            label: 0,
            source: "Synthetic Novel".into(),
            token_count: None,
        });
        samples.push(Sample {
            id: format!("rw-{id}"),
            word_count: count_words(&text1),
            text: text1,
            label: 1,
            source: format!("rewritten:{id}"),
            token_count: None,
        });
    }
    samples
}

/// Build one excerpt of 90-120 words: mostly filler, with the own-class
/// markers planted often and the other class's markers rarely.
fn synth_text(rng: &mut ChaCha8Rng, own: &[&str], other: &[&str]) -> String {
    let target_words = rng.random_range(90..=120);
    let mut words: Vec<String> = Vec::with_capacity(target_words);
    let mut sentence_left = rng.random_range(6..=14);
    let mut start_of_sentence = true;
    while words.len() < target_words {
        let roll: f64 = rng.random();
        let word = if roll < 0.18 {
            own[rng.random_range(0..own.len())]
        } else if roll < 0.22 {
            other[rng.random_range(0..other.len())]
        } else {
            FILLER[rng.random_range(0..FILLER.len())]
        };
        let mut word = word.to_string();
        if start_of_sentence {
            let mut chars = word.chars();
            if let Some(first) = chars.next() {
                word = first.to_uppercase().collect::<String>() + chars.as_str();
            }
            start_of_sentence = false;
        }
        sentence_left -= 1;
        if sentence_left == 0 || words.len() + 1 == target_words {
            word.push('.');
            sentence_left = rng.random_range(6..=14);
            start_of_sentence = true;
        } else if rng.random::<f64>() < 0.08 {
            word.push(',');
        }
        words.push(word);
    }
    words.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(synthetic_pairs(10, 7), synthetic_pairs(10, 7));
        assert_ne!(synthetic_pairs(10, 7), synthetic_pairs(10, 8));
    }

    #[test]
    fn pairs_are_well_formed() {
        let samples = synthetic_pairs(5, 1);
        assert_eq!(samples.len(), 10);
        for pair in samples.chunks(2) {
            assert_eq!(pair[0].label, 0);
            assert_eq!(pair[1].label, 1);
            assert_eq!(pair[1].rewrite_source_id(), Some(pair[0].id.as_str()));
            assert!(pair[0].text.ends_with('.'));
            assert!(pair[0].word_count >= 90 && pair[0].word_count <= 120);
        }
    }

    #[test]
    fn planted_markers_skew_by_class() {
        let samples = synthetic_pairs(50, 3);
        let count = |label: u8, pool: &[&str]| -> usize {
            samples
                .iter()
                .filter(|s| s.label == label)
                .map(|s| {
                    s.text
                        .split_whitespace()
                        .filter(|w| pool.contains(&w.trim_end_matches(['.', ','])))
                        .count()
                })
                .sum()
        };
        assert!(count(0, PLANT_CLASS0) > 3 * count(0, PLANT_CLASS1));
        assert!(count(1, PLANT_CLASS1) > 3 * count(1, PLANT_CLASS0));
    }
}
