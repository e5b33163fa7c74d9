//! Command-line front end: wires the corpus, rewriting, training, analysis
//! and explanation stages into subcommands, plus a config-driven
//! `pipeline run` for whole-run reproducibility.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use veridict::analysis::{annotated_table_tsv, join_annotations, load_annotations};
use veridict::classifiers::load_model;
use veridict::corpus::{count_words, write_samples, Sample, DEFAULT_MAX_WORDS, DEFAULT_MIN_WORDS};
use veridict::features::{parse_stats_table, select_salient};
use veridict::pipeline::{
    self, AblateStage, ChunkStage, CleanStage, EntropyStage, EvalStage, ExplainStage,
    FeaturesStage, RewriteStage, SplitStage, TokenizeStage, TrainStage,
};
use veridict::synth::synthetic_pairs;

#[derive(Parser)]
#[command(
    name = "veridict",
    version,
    about = "Interpretable detection of LLM-rewritten fiction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus preparation: clean, chunk, split, import.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Send class-0 excerpts to a chat-completion endpoint for rewriting.
    Rewrite {
        /// TOML file with the rewrite endpoint settings and input/output paths.
        #[arg(long)]
        config: PathBuf,
        /// Continue from the checkpoint file instead of refusing to reuse it.
        #[arg(long)]
        resume: bool,
    },
    /// Emit one space-joined token line per sample.
    Tokenize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a split directory.
    Train {
        #[arg(long, default_value = "linear")]
        algo: String,
        #[arg(long)]
        splits: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        max_epochs: Option<u32>,
        #[arg(long)]
        patience: Option<u32>,
        /// Naive Bayes smoothing constant.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        max_iters: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate a model file over one split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        splits: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature statistics and salient-subset selection.
    #[command(subcommand)]
    Features(FeaturesCommand),
    /// Feature-removal ablation curve.
    Ablate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        splits: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        /// plain or filtered.
        #[arg(long, default_value = "plain")]
        mode: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shannon-entropy curve of one class's token stream.
    Entropy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        class: u8,
        #[arg(long, default_value_t = 1000)]
        step: usize,
        /// Shuffle sample order first; totals are order-invariant, curve
        /// shapes are not.
        #[arg(long)]
        shuffle_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Manual-annotation workflow.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Render a token-level HTML explanation report.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sample: String,
        /// Render the sample and its pair side by side.
        #[arg(long)]
        pair: bool,
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Class-0 highlight colour as rrggbb hex.
        #[arg(long)]
        negative_color: Option<String>,
        /// Class-1 highlight colour as rrggbb hex.
        #[arg(long)]
        positive_color: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Config-driven multi-stage runs.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Generate the synthetic two-distribution demo corpus.
    Synth {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Strip boilerplate, page numbers and chapter headings from raw text.
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cut cleaned text into excerpts, always ending on a full stop.
    Chunk {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Novel title recorded as each excerpt's source.
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = DEFAULT_MIN_WORDS)]
        min: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
        max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Deterministic pair-preserving train/validation/test split.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Three comma-separated ratios summing to 1.
        #[arg(long, default_value = "0.7,0.15,0.15", value_parser = parse_ratios)]
        ratios: Ratios,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a sample file from published token-line files (class-1 line i
    /// is the rewrite of class-0 line i).
    ImportTokenised {
        #[arg(long)]
        class0: PathBuf,
        #[arg(long)]
        class1: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "imported")]
        source: String,
    },
    /// Token-length mean and standard deviation per class per split.
    LengthStats {
        #[arg(long)]
        splits: PathBuf,
    },
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Per-class relative frequencies of every training-vocabulary token.
    Stats {
        #[arg(long)]
        splits: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter a stats table down to the salient subset.
    Select {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        threshold_f: Option<f64>,
        #[arg(long)]
        threshold_r: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnnotateCommand {
    /// Join a hand-annotation file with stats and model weights.
    Join {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        threshold_f: f64,
        #[arg(long, default_value_t = 0.75)]
        threshold_r: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Execute the stages listed in a TOML config, in dependency order.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overwrite stage outputs that already exist.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone)]
struct Ratios {
    values: [f64; 3],
}

fn parse_ratios(text: &str) -> Result<Ratios, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err("expected three comma-separated ratios".into());
    }
    Ok(Ratios {
        values: [parts[0], parts[1], parts[2]],
    })
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let here = Path::new("");
    match cli.command {
        Command::Corpus(cmd) => run_corpus(cmd, here)?,
        Command::Rewrite { config, resume } => {
            let stage: RewriteStage = toml::from_str(
                &fs::read_to_string(&config)
                    .with_context(|| format!("reading {}", config.display()))?,
            )?;
            let base = config.parent().unwrap_or(here);
            if let Some(checkpoint) = &stage.checkpoint {
                let path = base.join(checkpoint);
                if path.exists() && !resume {
                    bail!(
                        "checkpoint {} exists; pass --resume to continue that run",
                        path.display()
                    );
                }
            }
            pipeline::run_rewrite(base, &stage)?;
        }
        Command::Tokenize { input, out } => {
            pipeline::run_tokenize(
                here,
                &TokenizeStage {
                    input: input.display().to_string(),
                    output: out.display().to_string(),
                },
            )?;
        }
        Command::Train {
            algo,
            splits,
            out,
            seed,
            learning_rate,
            l2,
            max_epochs,
            patience,
            alpha,
            max_iters,
            tol,
        } => {
            pipeline::run_train(
                here,
                &TrainStage {
                    splits: splits.display().to_string(),
                    output: out.display().to_string(),
                    algo,
                    seed,
                    learning_rate,
                    l2,
                    max_epochs,
                    patience,
                    alpha,
                    max_iters,
                    tol,
                },
            )?;
        }
        Command::Eval {
            model,
            splits,
            split,
            out,
        } => {
            let out = out.unwrap_or_else(|| PathBuf::from("eval_report.json"));
            pipeline::run_eval(
                here,
                &EvalStage {
                    model: model.display().to_string(),
                    splits: splits.display().to_string(),
                    split,
                    output: out.display().to_string(),
                },
            )?;
        }
        Command::Features(cmd) => run_features(cmd, here)?,
        Command::Ablate {
            model,
            splits,
            stats,
            mode,
            n,
            threshold,
            out,
        } => {
            pipeline::run_ablate(
                here,
                &AblateStage {
                    model: model.display().to_string(),
                    splits: splits.display().to_string(),
                    stats: stats.display().to_string(),
                    output: out.display().to_string(),
                    mode: Some(mode),
                    n,
                    threshold,
                },
            )?;
        }
        Command::Entropy {
            input,
            class,
            step,
            shuffle_seed,
            out,
        } => {
            pipeline::run_entropy(
                here,
                &EntropyStage {
                    input: input.display().to_string(),
                    class,
                    step,
                    shuffle_seed,
                    output: out.display().to_string(),
                },
            )?;
        }
        Command::Annotate(AnnotateCommand::Join {
            annotations,
            stats,
            model,
            threshold_f,
            threshold_r,
            out,
        }) => {
            let (model, vocab) = load_model(&fs::read_to_string(&model)?)?;
            let model = model.as_linear()?;
            let stats = parse_stats_table(&fs::read_to_string(&stats)?, &vocab)?;
            let subset = select_salient(&stats, threshold_f, threshold_r);
            let entries = load_annotations(&fs::read_to_string(&annotations)?)?;
            let table = join_annotations(&entries, &subset, &stats, model, &vocab);
            for warning in &table.warnings {
                eprintln!("warning: {warning}");
            }
            fs::write(&out, annotated_table_tsv(&table))?;
        }
        Command::Explain {
            model,
            input,
            sample,
            pair,
            annotations,
            negative_color,
            positive_color,
            out,
        } => {
            pipeline::run_explain(
                here,
                &ExplainStage {
                    model: model.display().to_string(),
                    input: input.display().to_string(),
                    sample,
                    pair,
                    annotations: annotations.map(|p| p.display().to_string()),
                    negative_color,
                    positive_color,
                    output: out.display().to_string(),
                },
            )?;
        }
        Command::Pipeline(PipelineCommand::Run { config, force }) => {
            let manifest = pipeline::run_pipeline(&config, force)?;
            println!(
                "{} stage(s) complete; manifest records {} output file(s)",
                manifest.stages.len(),
                manifest
                    .stages
                    .iter()
                    .map(|s| s.outputs.len())
                    .sum::<usize>()
            );
        }
        Command::Synth { pairs, seed, out } => {
            write_samples(&out, &synthetic_pairs(pairs, seed))?;
            println!("wrote {} samples to {}", pairs * 2, out.display());
        }
    }
    Ok(())
}

fn run_corpus(cmd: CorpusCommand, here: &Path) -> Result<()> {
    match cmd {
        CorpusCommand::Clean { input, out } => {
            pipeline::run_clean(
                here,
                &CleanStage {
                    input: input.display().to_string(),
                    output: out.display().to_string(),
                },
            )?;
        }
        CorpusCommand::Chunk {
            input,
            out,
            source,
            min,
            max,
            seed,
        } => {
            pipeline::run_chunk(
                here,
                &ChunkStage {
                    input: input.display().to_string(),
                    output: out.display().to_string(),
                    source,
                    min_words: min,
                    max_words: max,
                    seed,
                },
            )?;
        }
        CorpusCommand::Split {
            input,
            out_dir,
            ratios,
            seed,
        } => {
            pipeline::run_split(
                here,
                &SplitStage {
                    input: input.display().to_string(),
                    output_dir: out_dir.display().to_string(),
                    ratios: ratios.values,
                    seed,
                },
            )?;
        }
        CorpusCommand::ImportTokenised {
            class0,
            class1,
            out,
            source,
        } => {
            let read_lines = |path: &PathBuf| -> Result<Vec<String>> {
                Ok(fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(String::from)
                    .collect())
            };
            let lines0 = read_lines(&class0)?;
            let lines1 = read_lines(&class1)?;
            if lines0.len() != lines1.len() {
                bail!(
                    "class files disagree: {} class-0 lines vs {} class-1 lines",
                    lines0.len(),
                    lines1.len()
                );
            }
            let mut samples = Vec::with_capacity(lines0.len() * 2);
            for (i, (t0, t1)) in lines0.into_iter().zip(lines1).enumerate() {
                let id = format!("{source}-{i:05}");
                samples.push(Sample {
                    id: id.clone(),
                    word_count: count_words(&t0),
                    text: t0,
                    label: 0,
                    source: source.clone(),
                    token_count: None,
                });
                samples.push(Sample {
                    id: format!("rw-{id}"),
                    word_count: count_words(&t1),
                    text: t1,
                    label: 1,
                    source: format!("rewritten:{id}"),
                    token_count: None,
                });
            }
            write_samples(&out, &samples)?;
            println!("imported {} paired samples", samples.len());
        }
        CorpusCommand::LengthStats { splits } => {
            let split = veridict::corpus::load_split(&splits)?;
            let stats =
                veridict::corpus::length_stats(&split, |t| veridict::tokenizer::tokenize(t).len())?;
            println!("split\tclass\tmean_tokens\tstd_tokens");
            for row in stats {
                println!(
                    "{}\t{}\t{:.1}\t{:.1}",
                    row.split, row.class_label, row.mean_tokens, row.std_tokens
                );
            }
        }
    }
    Ok(())
}

fn run_features(cmd: FeaturesCommand, here: &Path) -> Result<()> {
    match cmd {
        FeaturesCommand::Stats { splits, out } => {
            pipeline::run_features(
                here,
                &FeaturesStage {
                    splits: splits.display().to_string(),
                    output: out.display().to_string(),
                },
            )?;
        }
        FeaturesCommand::Select {
            stats,
            threshold_f,
            threshold_r,
            out,
        } => {
            let table = fs::read_to_string(&stats)?;
            fs::write(
                &out,
                pipeline::salient_table(&table, threshold_f, threshold_r)?,
            )?;
        }
    }
    Ok(())
}
