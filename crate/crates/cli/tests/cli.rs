//! End-to-end runs of the `veridict` binary over a temp workspace.

use std::path::Path;
use std::process::{Command, Output};

fn veridict(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veridict"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = veridict(dir, args);
    assert!(
        out.status.success(),
        "veridict {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn full_synthetic_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    ok(
        dir,
        &[
            "synth",
            "--pairs",
            "60",
            "--seed",
            "42",
            "--out",
            "data.jsonl",
        ],
    );
    ok(
        dir,
        &[
            "corpus",
            "split",
            "--in",
            "data.jsonl",
            "--out-dir",
            "splits",
            "--ratios",
            "0.7,0.15,0.15",
            "--seed",
            "1",
        ],
    );
    ok(
        dir,
        &[
            "features",
            "stats",
            "--splits",
            "splits",
            "--out",
            "stats.tsv",
        ],
    );
    ok(
        dir,
        &[
            "train",
            "--algo",
            "linear",
            "--splits",
            "splits",
            "--seed",
            "3",
            "--max-epochs",
            "60",
            "--out",
            "model.json",
        ],
    );
    let eval_out = ok(
        dir,
        &[
            "eval",
            "--model",
            "model.json",
            "--splits",
            "splits",
            "--out",
            "eval.json",
        ],
    );
    assert!(eval_out.contains("accuracy"), "eval output: {eval_out}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("eval.json")).unwrap()).unwrap();
    assert!(report["accuracy"].as_f64().unwrap() > 0.9);

    ok(
        dir,
        &[
            "features",
            "select",
            "--stats",
            "stats.tsv",
            "--out",
            "salient.tsv",
        ],
    );
    let salient = std::fs::read_to_string(dir.join("salient.tsv")).unwrap();
    assert!(salient.starts_with("# threshold_f=100 threshold_r=0.75"));

    ok(
        dir,
        &[
            "ablate",
            "--model",
            "model.json",
            "--splits",
            "splits",
            "--stats",
            "stats.tsv",
            "--mode",
            "filtered",
            "--n",
            "20",
            "--threshold",
            "0.1",
            "--out",
            "ablation.csv",
        ],
    );
    let ablation = std::fs::read_to_string(dir.join("ablation.csv")).unwrap();
    assert!(ablation.starts_with("removals,accuracy\n"));
    assert_eq!(ablation.lines().count(), 22); // header + baseline + 20 removals

    ok(
        dir,
        &[
            "entropy",
            "--in",
            "data.jsonl",
            "--class",
            "0",
            "--step",
            "500",
            "--out",
            "entropy0.csv",
        ],
    );
    assert!(std::fs::read_to_string(dir.join("entropy0.csv"))
        .unwrap()
        .starts_with("tokens,bits\n"));

    ok(
        dir,
        &["tokenize", "--in", "data.jsonl", "--out", "tokens.txt"],
    );
    assert_eq!(
        std::fs::read_to_string(dir.join("tokens.txt"))
            .unwrap()
            .lines()
            .count(),
        120
    );

    // Explain a test-split pair.
    let test_samples = std::fs::read_to_string(dir.join("splits/test.jsonl")).unwrap();
    let first: serde_json::Value =
        serde_json::from_str(test_samples.lines().next().unwrap()).unwrap();
    let sample_id = first["id"].as_str().unwrap();
    ok(
        dir,
        &[
            "explain",
            "--model",
            "model.json",
            "--in",
            "data.jsonl",
            "--sample",
            sample_id,
            "--pair",
            "--out",
            "report.html",
        ],
    );
    let html = std::fs::read_to_string(dir.join("report.html")).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert_eq!(html.matches("<section class=\"view\">").count(), 2);
}

#[test]
fn corpus_clean_and_chunk_commands() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    let mut novel = String::from("CHAPTER I\n");
    for i in 0..60 {
        novel.push_str(&format!(
            "Sentence number {i} has exactly a handful of ordinary words in it. "
        ));
    }
    std::fs::write(dir.join("raw.txt"), &novel).unwrap();

    ok(
        dir,
        &["corpus", "clean", "--in", "raw.txt", "--out", "clean.txt"],
    );
    let cleaned = std::fs::read_to_string(dir.join("clean.txt")).unwrap();
    assert!(!cleaned.contains("CHAPTER"));

    ok(
        dir,
        &[
            "corpus",
            "chunk",
            "--in",
            "clean.txt",
            "--out",
            "chunks.jsonl",
            "--source",
            "Test Novel",
            "--min",
            "20",
            "--max",
            "40",
            "--seed",
            "5",
        ],
    );
    let chunks = std::fs::read_to_string(dir.join("chunks.jsonl")).unwrap();
    assert!(chunks.lines().count() > 5);
    for line in chunks.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["label"], 0);
        assert_eq!(v["source"], "Test Novel");
        assert!(v["text"].as_str().unwrap().ends_with('.'));
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("chunks.jsonl.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["min_words"], 20);
}

#[test]
fn import_tokenised_builds_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    std::fs::write(
        dir.join("c0.txt"),
        "He said , ' Hello ' .\nShe left early .\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("c1.txt"),
        "He remarked , ' Hi ' .\nShe departed soon .\n",
    )
    .unwrap();
    ok(
        dir,
        &[
            "corpus",
            "import-tokenised",
            "--class0",
            "c0.txt",
            "--class1",
            "c1.txt",
            "--out",
            "imported.jsonl",
            "--source",
            "det",
        ],
    );
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(dir.join("imported.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1]["source"], "rewritten:det-00000");
}

#[test]
fn pipeline_run_respects_output_immutability() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    ok(
        dir,
        &[
            "synth",
            "--pairs",
            "10",
            "--seed",
            "2",
            "--out",
            "data.jsonl",
        ],
    );
    std::fs::write(
        dir.join("run.toml"),
        concat!(
            "stages = [\"split\", \"tokenize\"]\n",
            "[split]\ninput = \"data.jsonl\"\noutput_dir = \"splits\"\nseed = 4\n",
            "[tokenize]\ninput = \"data.jsonl\"\noutput = \"tokens.txt\"\n",
        ),
    )
    .unwrap();
    let out = ok(dir, &["pipeline", "run", "--config", "run.toml"]);
    assert!(out.contains("2 stage(s) complete"));
    assert!(dir.join("run_manifest.json").exists());

    let second = veridict(dir, &["pipeline", "run", "--config", "run.toml"]);
    assert!(!second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("already exists"));

    let forced = veridict(dir, &["pipeline", "run", "--config", "run.toml", "--force"]);
    assert!(forced.status.success());
}

#[test]
fn missing_input_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = veridict(
        dir.path(),
        &["tokenize", "--in", "missing.jsonl", "--out", "t.txt"],
    );
    assert!(!out.status.success());
}

#[test]
fn annotate_join_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    ok(
        dir,
        &[
            "synth",
            "--pairs",
            "40",
            "--seed",
            "9",
            "--out",
            "data.jsonl",
        ],
    );
    ok(
        dir,
        &[
            "corpus",
            "split",
            "--in",
            "data.jsonl",
            "--out-dir",
            "splits",
            "--seed",
            "1",
        ],
    );
    ok(
        dir,
        &[
            "features",
            "stats",
            "--splits",
            "splits",
            "--out",
            "stats.tsv",
        ],
    );
    ok(
        dir,
        &[
            "train",
            "--splits",
            "splits",
            "--seed",
            "1",
            "--max-epochs",
            "40",
            "--out",
            "model.json",
        ],
    );
    std::fs::write(
        dir.join("notes.tsv"),
        "said\tE1.1\tdialogue verb\nremarked\tE1.1,E1.2\t\n",
    )
    .unwrap();
    ok(
        dir,
        &[
            "annotate",
            "join",
            "--annotations",
            "notes.tsv",
            "--stats",
            "stats.tsv",
            "--model",
            "model.json",
            "--out",
            "joined.tsv",
        ],
    );
    let joined = std::fs::read_to_string(dir.join("joined.tsv")).unwrap();
    assert!(joined.starts_with("token\tf0\tf1\tR\tweight\tcodes\n"));
    assert!(joined.contains("E1.1\t2"));
}
