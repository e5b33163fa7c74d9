//! Labelled text excerpts and the dataset plumbing around them: cleaning
//! raw novels, chunking them into excerpts, assembling pair-preserving
//! train/validation/test splits, and line-delimited persistence.

mod chunk;
mod clean;
mod split;

pub use chunk::{
    chunk_text, chunk_with_targets, split_sentences, ChunkOutcome, Excerpt, DEFAULT_ABBREVIATIONS,
    DEFAULT_MAX_WORDS, DEFAULT_MIN_WORDS,
};
pub use clean::clean_source;
pub use split::split_dataset;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefix marking a Class-1 sample's provenance, as in `rewritten:<id>`.
pub const REWRITTEN_PREFIX: &str = "rewritten:";

/// One labelled text excerpt. Class 0 is human-written, class 1 is the LLM
/// rewrite of the class-0 sample named by `source`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub label: u8,
    /// Novel title for class 0; `rewritten:<id>` for class 1.
    pub source: String,
    /// Space-delimited word count of `text`.
    pub word_count: usize,
    /// Unigram count, filled once the sample has been tokenised.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token_count: Option<usize>,
}

impl Sample {
    /// The class-0 sample id this rewrite points back to, if any.
    pub fn rewrite_source_id(&self) -> Option<&str> {
        self.source.strip_prefix(REWRITTEN_PREFIX)
    }
}

/// Space-delimited word count, the unit the chunk targets are drawn in.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Disjoint train/validation/test lists plus the parameters that produced
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

impl DatasetSplit {
    pub fn split_names() -> [&'static str; 3] {
        ["train", "validation", "test"]
    }

    pub fn by_name(&self, name: &str) -> Option<&[Sample]> {
        match name {
            "train" => Some(&self.train),
            "validation" => Some(&self.validation),
            "test" => Some(&self.test),
            _ => None,
        }
    }
}

/// Token-length mean and population standard deviation for one class of one
/// split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub split: String,
    pub class_label: u8,
    pub mean_tokens: f64,
    pub std_tokens: f64,
}

/// Compute per-class length statistics for every split, using the supplied
/// token counter (normally the custom tokeniser).
pub fn length_stats(
    split: &DatasetSplit,
    count_tokens: impl Fn(&str) -> usize,
) -> Result<Vec<LengthStats>> {
    let mut out = Vec::new();
    for name in DatasetSplit::split_names() {
        let samples = split.by_name(name).unwrap();
        for label in 0..2u8 {
            let counts: Vec<f64> = samples
                .iter()
                .filter(|s| s.label == label)
                .map(|s| count_tokens(&s.text) as f64)
                .collect();
            if counts.is_empty() {
                return Err(Error::EmptyClass {
                    label,
                    split: name.into(),
                });
            }
            let n = counts.len() as f64;
            let mean = counts.iter().sum::<f64>() / n;
            let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
            out.push(LengthStats {
                split: name.into(),
                class_label: label,
                mean_tokens: mean,
                std_tokens: var.sqrt(),
            });
        }
    }
    Ok(out)
}

/// Fill `token_count` on every sample with the supplied counter.
pub fn fill_token_counts(samples: &mut [Sample], count_tokens: impl Fn(&str) -> usize) {
    for s in samples.iter_mut() {
        s.token_count = Some(count_tokens(&s.text));
    }
}

/// Write samples as line-delimited JSON, one record per line, fixed field
/// order.
pub fn write_samples(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for s in samples {
        serde_json::to_writer(&mut file, s)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a line-delimited sample file, reporting the line of any malformed
/// record.
pub fn read_samples(path: &Path) -> Result<Vec<Sample>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: Sample = serde_json::from_str(&line).map_err(|source| Error::BadRecord {
            line: idx + 1,
            source,
        })?;
        if sample.label > 1 {
            return Err(Error::Config(format!(
                "line {}: label {} is not a class (expected 0 or 1)",
                idx + 1,
                sample.label
            )));
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Sidecar manifest written next to a persisted split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub tool_version: String,
    pub seed: u64,
    pub ratios: [f64; 3],
}

/// Persist a split as `train.jsonl`, `validation.jsonl`, `test.jsonl` plus
/// `split_manifest.json` in `dir`.
pub fn save_split(dir: &Path, split: &DatasetSplit) -> Result<()> {
    fs::create_dir_all(dir)?;
    for name in DatasetSplit::split_names() {
        write_samples(
            &dir.join(format!("{name}.jsonl")),
            split.by_name(name).unwrap(),
        )?;
    }
    let manifest = SplitManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: split.seed,
        ratios: split.ratios,
    };
    fs::write(
        dir.join("split_manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Load a split persisted by [`save_split`].
pub fn load_split(dir: &Path) -> Result<DatasetSplit> {
    let manifest: SplitManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("split_manifest.json"))?)?;
    Ok(DatasetSplit {
        train: read_samples(&dir.join("train.jsonl"))?,
        validation: read_samples(&dir.join("validation.jsonl"))?,
        test: read_samples(&dir.join("test.jsonl"))?,
        seed: manifest.seed,
        ratios: manifest.ratios,
    })
}
