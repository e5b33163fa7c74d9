//! Stage wiring: the same typed stage functions back both the CLI
//! subcommands and the config-driven `pipeline run`, which executes stages
//! in dependency order and records a manifest of seeds and output digests
//! for reproducibility.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{ablation_csv, ablation_curve, entropy_csv, entropy_curve, load_annotations};
use crate::classifiers::{
    evaluate, load_model, save_model, train_linear, train_logreg, train_nb, AnyModel, EvalDoc,
    LinearHyper, LogRegHyper,
};
use crate::corpus::{
    chunk_text, clean_source, read_samples, save_split, split_dataset, write_samples, Sample,
    DEFAULT_MAX_WORDS, DEFAULT_MIN_WORDS,
};
use crate::error::{Error, Result};
use crate::explain::{explain_document, render_report, RenderOptions};
use crate::features::{
    class_frequencies, export_stats_table, parse_stats_table, select_salient, vectorize,
    CountVector, Vocabulary, DEFAULT_THRESHOLD_F, DEFAULT_THRESHOLD_R,
};
use crate::rewrite::{rewrite_corpus, RewriteConfig};
use crate::tokenizer::{tokenize, TokenStream};

// ---------------------------------------------------------------------------
// Dataset helpers shared across stages.
// ---------------------------------------------------------------------------

/// Tokenise labelled samples, carrying the sample ids along.
pub fn labeled_streams(samples: &[Sample]) -> Vec<(TokenStream, u8)> {
    samples
        .iter()
        .map(|s| {
            let mut stream = tokenize(&s.text);
            stream.source_id = s.id.clone();
            (stream, s.label)
        })
        .collect()
}

/// Vectorise labelled token streams against a vocabulary.
pub fn labeled_counts(streams: &[(TokenStream, u8)], vocab: &Vocabulary) -> Vec<(CountVector, u8)> {
    streams
        .iter()
        .map(|(s, l)| (vectorize(s, vocab), *l))
        .collect()
}

/// Build evaluation documents (id + counts + label) for a sample list.
pub fn eval_docs(samples: &[Sample], vocab: &Vocabulary) -> Vec<EvalDoc> {
    samples
        .iter()
        .map(|s| EvalDoc {
            id: s.id.clone(),
            counts: vectorize(&tokenize(&s.text), vocab),
            label: s.label,
        })
        .collect()
}

/// Concatenated token stream of one class, in sample file order.
pub fn class_token_stream(samples: &[Sample], label: u8) -> Vec<String> {
    samples
        .iter()
        .filter(|s| s.label == label)
        .flat_map(|s| tokenize(&s.text).tokens)
        .collect()
}

// ---------------------------------------------------------------------------
// Stage parameter types (TOML tables and CLI flags deserialise into these).
// ---------------------------------------------------------------------------

fn default_min_words() -> usize {
    DEFAULT_MIN_WORDS
}
fn default_max_words() -> usize {
    DEFAULT_MAX_WORDS
}
fn default_ratios() -> [f64; 3] {
    [0.7, 0.15, 0.15]
}
fn default_split_name() -> String {
    "test".into()
}
fn default_algo() -> String {
    "linear".into()
}
fn default_ablate_n() -> usize {
    100
}
fn default_step() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
pub struct CleanStage {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChunkStage {
    pub input: String,
    pub output: String,
    /// Source name recorded on every excerpt (novel title).
    pub source: String,
    #[serde(default = "default_min_words")]
    pub min_words: usize,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RewriteStage {
    /// Class-0 samples to rewrite.
    pub input: String,
    /// Combined class-0 + class-1 dataset written here.
    pub output: String,
    pub checkpoint: Option<String>,
    /// Request/response log (JSONL of rewrite records).
    pub log: Option<String>,
    #[serde(flatten)]
    pub config: RewriteConfig,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SplitStage {
    pub input: String,
    pub output_dir: String,
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TokenizeStage {
    pub input: String,
    /// One space-joined token line per sample, in file order.
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FeaturesStage {
    /// Directory produced by the split stage.
    pub splits: String,
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TrainStage {
    pub splits: String,
    pub output: String,
    #[serde(default = "default_algo")]
    pub algo: String,
    #[serde(default)]
    pub seed: u64,
    pub learning_rate: Option<f64>,
    pub l2: Option<f64>,
    pub max_epochs: Option<u32>,
    pub patience: Option<u32>,
    pub alpha: Option<f64>,
    pub max_iters: Option<u32>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EvalStage {
    pub model: String,
    pub splits: String,
    #[serde(default = "default_split_name")]
    pub split: String,
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AblateStage {
    pub model: String,
    pub splits: String,
    /// Stats table from the features stage.
    pub stats: String,
    pub output: String,
    /// "plain" or "filtered".
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default = "default_ablate_n")]
    pub n: usize,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EntropyStage {
    /// Any sample file; the class stream is its file-order concatenation.
    pub input: String,
    pub class: u8,
    #[serde(default = "default_step")]
    pub step: usize,
    /// Shuffle sample order before concatenating. The total is
    /// order-invariant but the curve shape is not.
    pub shuffle_seed: Option<u64>,
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExplainStage {
    pub model: String,
    /// Sample file to look ids up in.
    pub input: String,
    pub sample: String,
    /// Also render the paired sample (the rewrite, or the original).
    #[serde(default)]
    pub pair: bool,
    pub annotations: Option<String>,
    /// Highlight colours as `rrggbb` hex, for colour-vision accessibility.
    pub negative_color: Option<String>,
    pub positive_color: Option<String>,
    pub output: String,
}

// ---------------------------------------------------------------------------
// Stage implementations.
// ---------------------------------------------------------------------------

pub fn run_clean(base: &Path, stage: &CleanStage) -> Result<Vec<PathBuf>> {
    let raw = fs::read_to_string(base.join(&stage.input))?;
    let cleaned = clean_source(&raw)?;
    let out = base.join(&stage.output);
    fs::write(&out, cleaned)?;
    Ok(vec![out])
}

pub fn run_chunk(base: &Path, stage: &ChunkStage) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(base.join(&stage.input))?;
    let outcome = chunk_text(&text, stage.min_words, stage.max_words, stage.seed)?;
    let slug: String = stage
        .source
        .chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    let samples: Vec<Sample> = outcome
        .excerpts
        .iter()
        .enumerate()
        .map(|(i, e)| Sample {
            id: format!("{slug}-{i:05}"),
            text: e.text.clone(),
            label: 0,
            source: stage.source.clone(),
            word_count: e.word_count,
            token_count: None,
        })
        .collect();
    let out = base.join(&stage.output);
    write_samples(&out, &samples)?;
    let manifest = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": stage.seed,
        "min_words": stage.min_words,
        "max_words": stage.max_words,
        "source": stage.source,
        "oversize_excerpts": outcome.oversize_count,
    });
    let manifest_path = base.join(format!("{}.manifest.json", stage.output));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    if outcome.oversize_count > 0 {
        eprintln!(
            "warning: {} oversize excerpt(s) exceeded {} words",
            outcome.oversize_count, stage.max_words
        );
    }
    Ok(vec![out, manifest_path])
}

pub fn run_rewrite(base: &Path, stage: &RewriteStage) -> Result<Vec<PathBuf>> {
    let class0 = read_samples(&base.join(&stage.input))?;
    let checkpoint = stage.checkpoint.as_ref().map(|p| base.join(p));
    let outcome = rewrite_corpus(&class0, &stage.config, checkpoint.as_deref())?;
    if !outcome.failures.is_empty() {
        eprintln!(
            "warning: {} rewrite(s) failed after retries",
            outcome.failures.len()
        );
        for (id, err) in &outcome.failures {
            eprintln!("  {id}: {err}");
        }
    }
    let mut combined = class0;
    combined.extend(outcome.samples);
    let out = base.join(&stage.output);
    write_samples(&out, &combined)?;
    let mut outputs = vec![out];
    if let Some(log) = &stage.log {
        let path = base.join(log);
        let mut text = String::new();
        for record in &outcome.records {
            text.push_str(&serde_json::to_string(record)?);
            text.push('\n');
        }
        fs::write(&path, text)?;
        outputs.push(path);
    }
    Ok(outputs)
}

pub fn run_split(base: &Path, stage: &SplitStage) -> Result<Vec<PathBuf>> {
    let samples = read_samples(&base.join(&stage.input))?;
    let split = split_dataset(&samples, stage.ratios, stage.seed)?;
    let dir = base.join(&stage.output_dir);
    save_split(&dir, &split)?;
    Ok([
        "train.jsonl",
        "validation.jsonl",
        "test.jsonl",
        "split_manifest.json",
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect())
}

pub fn run_tokenize(base: &Path, stage: &TokenizeStage) -> Result<Vec<PathBuf>> {
    let samples = read_samples(&base.join(&stage.input))?;
    let mut out = String::new();
    for s in &samples {
        out.push_str(&tokenize(&s.text).tokens.join(" "));
        out.push('\n');
    }
    let path = base.join(&stage.output);
    fs::write(&path, out)?;
    Ok(vec![path])
}

pub fn run_features(base: &Path, stage: &FeaturesStage) -> Result<Vec<PathBuf>> {
    let train = read_samples(&base.join(&stage.splits).join("train.jsonl"))?;
    let streams = labeled_streams(&train);
    let train_streams: Vec<TokenStream> = streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&train_streams)?;
    let stats = class_frequencies(&streams, &vocab)?;
    let path = base.join(&stage.output);
    fs::write(&path, export_stats_table(&stats, &vocab))?;
    Ok(vec![path])
}

pub fn run_train(base: &Path, stage: &TrainStage) -> Result<Vec<PathBuf>> {
    let dir = base.join(&stage.splits);
    let train = read_samples(&dir.join("train.jsonl"))?;
    let validation = read_samples(&dir.join("validation.jsonl"))?;

    let train_streams = labeled_streams(&train);
    let streams_only: Vec<TokenStream> = train_streams.iter().map(|(s, _)| s.clone()).collect();
    let vocab = Vocabulary::build(&streams_only)?;
    let train_counts = labeled_counts(&train_streams, &vocab);
    let val_counts = labeled_counts(&labeled_streams(&validation), &vocab);

    let model = match stage.algo.as_str() {
        "linear" => {
            let defaults = LinearHyper::default();
            let hyper = LinearHyper {
                learning_rate: stage.learning_rate.unwrap_or(defaults.learning_rate),
                l2: stage.l2.unwrap_or(defaults.l2),
                max_epochs: stage.max_epochs.unwrap_or(defaults.max_epochs),
                patience: stage.patience.unwrap_or(defaults.patience),
                seed: stage.seed,
            };
            AnyModel::Linear(train_linear(&vocab, &train_counts, &val_counts, &hyper)?)
        }
        "nb" => AnyModel::Nb(train_nb(&vocab, &train_counts, stage.alpha.unwrap_or(1.0))?),
        "logreg" => {
            let defaults = LogRegHyper::default();
            let hyper = LogRegHyper {
                l2: stage.l2.unwrap_or(defaults.l2),
                max_iters: stage.max_iters.unwrap_or(defaults.max_iters),
                tol: stage.tol.unwrap_or(defaults.tol),
                seed: stage.seed,
            };
            AnyModel::Linear(train_logreg(&vocab, &train_counts, &hyper)?)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown training algorithm `{other}` (expected linear, nb or logreg)"
            )))
        }
    };

    let path = base.join(&stage.output);
    fs::write(&path, save_model(&model, &vocab)?)?;
    Ok(vec![path])
}

pub fn run_eval(base: &Path, stage: &EvalStage) -> Result<Vec<PathBuf>> {
    let (model, vocab) = load_model(&fs::read_to_string(base.join(&stage.model))?)?;
    let samples = read_samples(
        &base
            .join(&stage.splits)
            .join(format!("{}.jsonl", stage.split)),
    )?;
    let docs = eval_docs(&samples, &vocab);
    let report = match &model {
        AnyModel::Linear(m) => evaluate(m, &docs)?,
        AnyModel::Nb(m) => evaluate(m, &docs)?,
    };
    let path = base.join(&stage.output);
    fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "{} on {}: accuracy {:.4} over {} samples",
        model.kind(),
        stage.split,
        report.accuracy,
        report.rows.len()
    );
    Ok(vec![path])
}

pub fn run_ablate(base: &Path, stage: &AblateStage) -> Result<Vec<PathBuf>> {
    let (model, vocab) = load_model(&fs::read_to_string(base.join(&stage.model))?)?;
    let model = model.as_linear()?;
    let stats = parse_stats_table(&fs::read_to_string(base.join(&stage.stats))?, &vocab)?;
    let test = read_samples(&base.join(&stage.splits).join("test.jsonl"))?;
    let counts: Vec<(CountVector, u8)> = labeled_counts(&labeled_streams(&test), &vocab);
    let threshold = match stage.mode.as_deref() {
        Some("filtered") => Some(stage.threshold.unwrap_or(0.1)),
        Some("plain") | None => None,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown ablation mode `{other}` (expected plain or filtered)"
            )))
        }
    };
    let result = ablation_curve(model, &counts, &stats, stage.n, threshold)?;
    let path = base.join(&stage.output);
    fs::write(&path, ablation_csv(&result))?;
    Ok(vec![path])
}

pub fn run_entropy(base: &Path, stage: &EntropyStage) -> Result<Vec<PathBuf>> {
    let mut samples: Vec<Sample> = read_samples(&base.join(&stage.input))?
        .into_iter()
        .filter(|s| s.label == stage.class)
        .collect();
    if let Some(seed) = stage.shuffle_seed {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        samples.shuffle(&mut rng);
    }
    let tokens = class_token_stream(&samples, stage.class);
    let series = entropy_curve(stage.class, &tokens, stage.step)?;
    let path = base.join(&stage.output);
    fs::write(&path, entropy_csv(&series))?;
    println!(
        "class {} entropy: {:.4} bits over {} tokens",
        stage.class,
        series.total_bits,
        tokens.len()
    );
    Ok(vec![path])
}

pub fn run_explain(base: &Path, stage: &ExplainStage) -> Result<Vec<PathBuf>> {
    let (model, vocab) = load_model(&fs::read_to_string(base.join(&stage.model))?)?;
    let model = model.as_linear()?;
    let samples = read_samples(&base.join(&stage.input))?;
    let find = |id: &str| -> Result<&Sample> {
        samples
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::SampleNotFound(id.to_string()))
    };
    let primary = find(&stage.sample)?;
    let mut picked = vec![primary];
    if stage.pair {
        let partner = match primary.rewrite_source_id() {
            Some(source) => find(source)?,
            None => samples
                .iter()
                .find(|s| s.rewrite_source_id() == Some(primary.id.as_str()))
                .ok_or_else(|| Error::SampleNotFound(format!("pair of {}", primary.id)))?,
        };
        // Human original on the left.
        if partner.label == 0 {
            picked.insert(0, partner);
        } else {
            picked.push(partner);
        }
    }
    let views = picked
        .iter()
        .map(|s| {
            let mut stream = tokenize(&s.text);
            stream.source_id = s.id.clone();
            explain_document(model, &vocab, &stream, Some(s.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let annotations = match &stage.annotations {
        Some(path) => Some(load_annotations(&fs::read_to_string(base.join(path))?)?),
        None => None,
    };
    let mut options = RenderOptions::default();
    if let Some(hex) = &stage.negative_color {
        options.negative_rgb = parse_hex_color(hex)?;
    }
    if let Some(hex) = &stage.positive_color {
        options.positive_rgb = parse_hex_color(hex)?;
    }
    let html = render_report(model, &views, annotations.as_deref(), &options)?;
    let path = base.join(&stage.output);
    fs::write(&path, html)?;
    Ok(vec![path])
}

fn parse_hex_color(hex: &str) -> Result<(u8, u8, u8)> {
    let hex = hex.trim_start_matches('#');
    if hex.len() != 6 {
        return Err(Error::Config(format!(
            "bad colour `{hex}`, expected rrggbb"
        )));
    }
    let byte = |range| {
        u8::from_str_radix(&hex[range], 16)
            .map_err(|_| Error::Config(format!("bad colour `{hex}`, expected rrggbb")))
    };
    Ok((byte(0..2)?, byte(2..4)?, byte(4..6)?))
}

/// Compute the salient subset from an exported stats table and render it as
/// TSV. The vocabulary is reconstructed from the table's own token column.
pub fn salient_table(
    stats_table: &str,
    threshold_f: Option<f64>,
    threshold_r: Option<f64>,
) -> Result<String> {
    let tokens: Vec<String> = stats_table
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("token\t"))
        .filter_map(|l| l.split('\t').next().map(String::from))
        .collect();
    let vocab = &Vocabulary::from_tokens(tokens);
    let stats = parse_stats_table(stats_table, vocab)?;
    let subset = select_salient(
        &stats,
        threshold_f.unwrap_or(DEFAULT_THRESHOLD_F),
        threshold_r.unwrap_or(DEFAULT_THRESHOLD_R),
    );
    let mut order = subset.features.clone();
    order.sort_by(|&a, &b| {
        stats
            .f_max(b)
            .partial_cmp(&stats.f_max(a))
            .unwrap()
            .then_with(|| vocab.token(a).cmp(vocab.token(b)))
    });
    let mut out = format!(
        "# threshold_f={} threshold_r={} selected={}\ntoken\tf0\tf1\tf_max\tR\n",
        subset.threshold_f,
        subset.threshold_r,
        subset.features.len()
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
    Ok(out)
}

// ---------------------------------------------------------------------------
// The config-driven pipeline runner.
// ---------------------------------------------------------------------------

/// Stages in dependency order; a run executes the requested subset in this
/// order regardless of how the config lists them.
pub const STAGE_ORDER: [&str; 11] = [
    "clean", "chunk", "rewrite", "split", "tokenize", "features", "train", "eval", "ablate",
    "entropy", "explain",
];

#[derive(Debug, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub version: u32,
    pub stages: Vec<String>,
    /// Manifest output path (default `run_manifest.json`).
    pub manifest: Option<String>,
    pub clean: Option<CleanStage>,
    pub chunk: Option<ChunkStage>,
    pub rewrite: Option<RewriteStage>,
    pub split: Option<SplitStage>,
    pub tokenize: Option<TokenizeStage>,
    pub features: Option<FeaturesStage>,
    pub train: Option<TrainStage>,
    pub eval: Option<EvalStage>,
    pub ablate: Option<AblateStage>,
    pub entropy: Option<EntropyStage>,
    pub explain: Option<ExplainStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRun {
    pub stage: String,
    pub seed: Option<u64>,
    pub outputs: Vec<FileDigest>,
    pub started_utc: String,
    pub finished_utc: String,
}

/// Record of one pipeline run: tool version, per-stage seeds and the digest
/// of every output file. Replaying with the same config reproduces the
/// digests of all deterministic stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub stages: Vec<StageRun>,
}

struct StagePlan<'a> {
    name: &'a str,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

/// Run the pipeline described by a TOML config file. Stage paths resolve
/// relative to the config file's directory. Outputs are immutable: an
/// existing output fails the run unless `force` is set.
pub fn run_pipeline(config_path: &Path, force: bool) -> Result<RunManifest> {
    let text = fs::read_to_string(config_path)?;
    let config: PipelineConfig = toml::from_str(&text)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();

    for name in &config.stages {
        if !STAGE_ORDER.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown stage `{name}`")));
        }
    }

    // Plan the run: collect per-stage inputs/outputs for validation.
    let mut plans: Vec<StagePlan> = Vec::new();
    for &name in STAGE_ORDER.iter() {
        if !config.stages.iter().any(|s| s == name) {
            continue;
        }
        let plan = plan_stage(&config, &base, name)?;
        plans.push(plan);
    }

    // Every input must exist on disk or be produced by an earlier stage.
    let mut produced: Vec<PathBuf> = Vec::new();
    for plan in &plans {
        for input in &plan.inputs {
            if !input.exists() && !produced.contains(input) {
                return Err(Error::MissingStageInput {
                    stage: plan.name.to_string(),
                    path: input.display().to_string(),
                });
            }
        }
        for output in &plan.outputs {
            if output.exists() && !force {
                return Err(Error::OutputExists(output.display().to_string()));
            }
            produced.push(output.clone());
        }
    }

    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        stages: Vec::new(),
    };
    for plan in &plans {
        let started = chrono::Utc::now().to_rfc3339();
        let outputs = execute_stage(&config, &base, plan.name)?;
        let finished = chrono::Utc::now().to_rfc3339();
        let digests = outputs
            .iter()
            .map(|p| {
                Ok(FileDigest {
                    path: p.strip_prefix(&base).unwrap_or(p).display().to_string(),
                    sha256: digest_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        manifest.stages.push(StageRun {
            stage: plan.name.to_string(),
            seed: plan.seed,
            outputs: digests,
            started_utc: started,
            finished_utc: finished,
        });
    }

    let manifest_path = base.join(config.manifest.as_deref().unwrap_or("run_manifest.json"));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn missing_section(name: &str) -> Error {
    Error::Config(format!(
        "stage `{name}` is listed but has no [{name}] section"
    ))
}

fn plan_stage<'a>(config: &PipelineConfig, base: &Path, name: &'a str) -> Result<StagePlan<'a>> {
    let join = |p: &String| base.join(p);
    let plan = match name {
        "clean" => {
            let s = config.clean.as_ref().ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: None,
                inputs: vec![join(&s.input)],
                outputs: vec![join(&s.output)],
            }
        }
        "chunk" => {
            let s = config.chunk.as_ref().ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: Some(s.seed),
                inputs: vec![join(&s.input)],
                outputs: vec![
                    join(&s.output),
                    base.join(format!("{}.manifest.json", s.output)),
                ],
            }
        }
        "rewrite" => {
            let s = config
                .rewrite
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            let mut outputs = vec![join(&s.output)];
            if let Some(log) = &s.log {
                outputs.push(join(log));
            }
            StagePlan {
                name,
                seed: Some(s.config.seed),
                inputs: vec![join(&s.input)],
                outputs,
            }
        }
        "split" => {
            let s = config.split.as_ref().ok_or_else(|| missing_section(name))?;
            let dir = join(&s.output_dir);
            StagePlan {
                name,
                seed: Some(s.seed),
                inputs: vec![join(&s.input)],
                outputs: ["train.jsonl", "validation.jsonl", "test.jsonl"]
                    .iter()
                    .map(|f| dir.join(f))
                    .collect(),
            }
        }
        "tokenize" => {
            let s = config
                .tokenize
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: None,
                inputs: vec![join(&s.input)],
                outputs: vec![join(&s.output)],
            }
        }
        "features" => {
            let s = config
                .features
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: None,
                inputs: vec![join(&s.splits).join("train.jsonl")],
                outputs: vec![join(&s.output)],
            }
        }
        "train" => {
            let s = config.train.as_ref().ok_or_else(|| missing_section(name))?;
            let dir = join(&s.splits);
            StagePlan {
                name,
                seed: Some(s.seed),
                inputs: vec![dir.join("train.jsonl"), dir.join("validation.jsonl")],
                outputs: vec![join(&s.output)],
            }
        }
        "eval" => {
            let s = config.eval.as_ref().ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: None,
                inputs: vec![
                    join(&s.model),
                    join(&s.splits).join(format!("{}.jsonl", s.split)),
                ],
                outputs: vec![join(&s.output)],
            }
        }
        "ablate" => {
            let s = config
                .ablate
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: None,
                inputs: vec![
                    join(&s.model),
                    join(&s.stats),
                    join(&s.splits).join("test.jsonl"),
                ],
                outputs: vec![join(&s.output)],
            }
        }
        "entropy" => {
            let s = config
                .entropy
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            StagePlan {
                name,
                seed: s.shuffle_seed,
                inputs: vec![join(&s.input)],
                outputs: vec![join(&s.output)],
            }
        }
        "explain" => {
            let s = config
                .explain
                .as_ref()
                .ok_or_else(|| missing_section(name))?;
            let mut inputs = vec![join(&s.model), join(&s.input)];
            if let Some(a) = &s.annotations {
                inputs.push(join(a));
            }
            StagePlan {
                name,
                seed: None,
                inputs,
                outputs: vec![join(&s.output)],
            }
        }
        other => return Err(Error::Config(format!("unknown stage `{other}`"))),
    };
    Ok(plan)
}

fn execute_stage(config: &PipelineConfig, base: &Path, name: &str) -> Result<Vec<PathBuf>> {
    match name {
        "clean" => run_clean(base, config.clean.as_ref().unwrap()),
        "chunk" => run_chunk(base, config.chunk.as_ref().unwrap()),
        "rewrite" => run_rewrite(base, config.rewrite.as_ref().unwrap()),
        "split" => run_split(base, config.split.as_ref().unwrap()),
        "tokenize" => run_tokenize(base, config.tokenize.as_ref().unwrap()),
        "features" => run_features(base, config.features.as_ref().unwrap()),
        "train" => run_train(base, config.train.as_ref().unwrap()),
        "eval" => run_eval(base, config.eval.as_ref().unwrap()),
        "ablate" => run_ablate(base, config.ablate.as_ref().unwrap()),
        "entropy" => run_entropy(base, config.entropy.as_ref().unwrap()),
        "explain" => run_explain(base, config.explain.as_ref().unwrap()),
        other => Err(Error::Config(format!("unknown stage `{other}`"))),
    }
}

/// SHA-256 of a file's bytes, hex-encoded.
pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
