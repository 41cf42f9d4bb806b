//! Black-box tests of the `itemgraph` binary: the prepare/train/evaluate/
//! recommend/sweep pipeline on a synthetic dataset, reproducibility of
//! artifacts, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_itemgraph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output, context: &str) {
    assert!(
        out.status.success(),
        "{context} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Synthetic two-block dataset written as a CSV interaction file.
fn write_dataset(path: &Path) {
    use std::fmt::Write;
    let mut out = String::from("# synthetic two-block dataset\n");
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for u in 0..30 {
        let block = u % 2;
        for i in 0..20 {
            let p = if i % 2 == block { 0.7 } else { 0.15 };
            if next() < p {
                writeln!(out, "user{u},item{i},{}", 3 + (u + i) % 3).unwrap();
            }
        }
        // Guarantee enough interactions for 3-core and splitting.
        for j in 0..4 {
            writeln!(out, "user{u},item{},4", block + 2 * j).unwrap();
        }
    }
    std::fs::write(path, out).unwrap();
}

fn write_config(dir: &Path, data: &Path, out: &Path) -> PathBuf {
    let config = format!(
        r#"
[data]
path = "{data}"
positive_threshold = 3.0
k_core = 3

[split]
seed = 7
train_frac = 0.8
val_frac = 0.1
unseen_frac = 0.2
profile_build_frac = 0.9

[train]
dim = 8
depth = 1
top_k = 10
dropout_p = 0.2
l2_reg = 1e-6
learning_rate = 0.05
batch_size = 128
epochs = 4
seed = 11

[eval]
cutoffs = [5, 20]

[output]
dir = "{out}"
"#,
        data = data.display(),
        out = out.display()
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    path
}

struct Workspace {
    _tmp: tempfile::TempDir,
    config: PathBuf,
    run_dir: PathBuf,
}

fn prepared_workspace() -> Workspace {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("interactions.csv");
    write_dataset(&data);
    let run_dir = tmp.path().join("run");
    let config = write_config(tmp.path(), &data, &run_dir);
    let out = run(&["prepare", "--config", config.to_str().unwrap()]);
    assert_ok(&out, "prepare");
    Workspace {
        _tmp: tmp,
        config,
        run_dir,
    }
}

#[test]
fn prepare_writes_artifacts_and_is_reproducible() {
    let ws = prepared_workspace();
    for file in [
        "manifest.toml",
        "matrix/split.meta",
        "transductive/train.tsv",
        "transductive/validation.tsv",
        "transductive/test.tsv",
        "inductive/unseen_build.tsv",
        "inductive/unseen_eval.tsv",
    ] {
        assert!(ws.run_dir.join(file).exists(), "missing {file}");
    }
    let manifest = std::fs::read(ws.run_dir.join("manifest.toml")).unwrap();
    assert!(!std::str::from_utf8(&manifest).unwrap().contains("timestamp"));

    // Rerun into a fresh directory: byte-identical manifest and splits.
    let out = run(&[
        "prepare",
        "--config",
        ws.config.to_str().unwrap(),
        "--out",
        ws.run_dir.with_file_name("run2").to_str().unwrap(),
    ]);
    assert_ok(&out, "second prepare");
    let manifest2 = std::fs::read(ws.run_dir.with_file_name("run2").join("manifest.toml")).unwrap();
    // Manifests differ only in the output path-independent fields; both runs
    // used the same config so the bytes must match.
    assert_eq!(manifest, manifest2);
    for part in ["train.tsv", "validation.tsv", "test.tsv"] {
        let a = std::fs::read(ws.run_dir.join("transductive").join(part)).unwrap();
        let b = std::fs::read(ws.run_dir.with_file_name("run2").join("transductive").join(part)).unwrap();
        assert_eq!(a, b, "{part} differs between reruns");
    }
}

#[test]
fn missing_data_file_exits_2_naming_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "prepare",
        "--data",
        "/nonexistent/interactions.csv",
        "--out",
        tmp.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/interactions.csv"), "{stderr}");
}

#[test]
fn invalid_dropout_rejected_before_work() {
    let ws = prepared_workspace();
    let out = bin()
        .args(["train", "--config", ws.config.to_str().unwrap(), "--dropout", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropout"));
}

#[test]
fn train_evaluate_recommend_pipeline() {
    let ws = prepared_workspace();
    let config = ws.config.to_str().unwrap();

    let out = run(&["train", "--config", config]);
    assert_ok(&out, "train");
    let model_path = ws.run_dir.join("model.bin");
    assert!(model_path.exists());
    assert!(ws.run_dir.join("history.tsv").exists());
    let history = std::fs::read_to_string(ws.run_dir.join("history.tsv")).unwrap();
    assert!(history.starts_with("epoch\tloss"));
    assert_eq!(history.lines().count(), 1 + 4, "4 epochs + header");

    // Determinism: retrain into another directory, compare model bytes.
    let run2 = ws.run_dir.with_file_name("train2");
    std::fs::create_dir_all(&run2).unwrap();
    for sub in ["matrix", "transductive", "inductive"] {
        copy_dir(&ws.run_dir.join(sub), &run2.join(sub));
    }
    let out = run(&["train", "--config", config, "--out", run2.to_str().unwrap()]);
    assert_ok(&out, "second train");
    assert_eq!(
        std::fs::read(&model_path).unwrap(),
        std::fs::read(run2.join("model.bin")).unwrap(),
        "same seed must give identical model bytes"
    );

    // Transductive and inductive evaluation both produce reports.
    let out = run(&[
        "evaluate",
        "--model",
        model_path.to_str().unwrap(),
        "--splits",
        ws.run_dir.to_str().unwrap(),
    ]);
    assert_ok(&out, "evaluate transductive");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("transductive evaluation"));
    assert!(stdout.contains("@5") && stdout.contains("@20"));

    let out = run(&[
        "evaluate",
        "--model",
        model_path.to_str().unwrap(),
        "--splits",
        ws.run_dir.to_str().unwrap(),
        "--protocol",
        "inductive",
        "--cutoffs",
        "1",
    ]);
    assert_ok(&out, "evaluate inductive");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("inductive evaluation"));
    assert!(stdout.contains("@1") && !stdout.contains("@20"));

    // Recommendations exclude the profile and are stable across invocations.
    let rec = |args: &[&str]| -> String {
        let out = run(args);
        assert_ok(&out, "recommend");
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    let args = [
        "recommend",
        "--model",
        model_path.to_str().unwrap(),
        "--items",
        "item0,item2",
        "-n",
        "5",
    ];
    let first = rec(&args);
    assert_eq!(first.lines().count(), 5);
    for line in first.lines() {
        let key = line.split('\t').next().unwrap();
        assert!(key != "item0" && key != "item2", "profile item recommended");
    }
    assert_eq!(first, rec(&args), "same profile must give identical output");

    let single = rec(&[
        "recommend",
        "--model",
        model_path.to_str().unwrap(),
        "--items",
        "item1",
        "-n",
        "1",
    ]);
    assert_eq!(single.lines().count(), 1);

    // Unknown keys are skipped with a warning; all-unknown is an error.
    let out = run(&[
        "recommend",
        "--model",
        model_path.to_str().unwrap(),
        "--items",
        "item1,notakey",
        "-n",
        "3",
    ]);
    assert_ok(&out, "recommend with partial unknown keys");
    assert!(String::from_utf8_lossy(&out.stderr).contains("notakey"));

    let out = run(&[
        "recommend",
        "--model",
        model_path.to_str().unwrap(),
        "--items",
        "nope1,nope2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope1"));
}

#[test]
fn final_retrain_and_graph_export() {
    let ws = prepared_workspace();
    let graph_path = ws.run_dir.join("edges.tsv");
    let out = run(&[
        "train",
        "--config",
        ws.config.to_str().unwrap(),
        "--final-retrain",
        "--export-graph",
        graph_path.to_str().unwrap(),
    ]);
    assert_ok(&out, "train --final-retrain");
    assert!(ws.run_dir.join("model.bin").exists());

    let edges = std::fs::read_to_string(&graph_path).unwrap();
    assert!(!edges.is_empty());
    for line in edges.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3, "bad edge line {line:?}");
        assert!(fields[0].starts_with("item") && fields[1].starts_with("item"));
        assert_ne!(fields[0], fields[1], "self-loop in exported edge list");
        let w: f64 = fields[2].parse().unwrap();
        assert!(w > 0.0 && w <= 1.0);
    }

    // The retrained model still evaluates cleanly.
    let out = run(&[
        "evaluate",
        "--model",
        ws.run_dir.join("model.bin").to_str().unwrap(),
        "--splits",
        ws.run_dir.to_str().unwrap(),
    ]);
    assert_ok(&out, "evaluate retrained model");
}

#[test]
fn evaluate_rejects_mismatched_universe() {
    let ws = prepared_workspace();
    let out = run(&["train", "--config", ws.config.to_str().unwrap()]);
    assert_ok(&out, "train");

    // Prepare a second dataset with a different item universe.
    let tmp2 = tempfile::tempdir().unwrap();
    let data2 = tmp2.path().join("other.csv");
    let mut text = String::new();
    for u in 0..20 {
        for i in 0..12 {
            use std::fmt::Write;
            writeln!(text, "u{u},other{i},5").unwrap();
        }
    }
    std::fs::write(&data2, text).unwrap();
    let run2 = tmp2.path().join("run");
    let out = run(&[
        "prepare",
        "--data",
        data2.to_str().unwrap(),
        "--out",
        run2.to_str().unwrap(),
        "--k-core",
        "3",
        "--seed",
        "1",
    ]);
    assert_ok(&out, "prepare other dataset");

    let out = run(&[
        "evaluate",
        "--model",
        ws.run_dir.join("model.bin").to_str().unwrap(),
        "--splits",
        run2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incompatible"));
}

#[test]
fn sweep_writes_long_format_table() {
    let ws = prepared_workspace();
    let out = run(&[
        "sweep",
        "--config",
        ws.config.to_str().unwrap(),
        "--parameter",
        "depth",
        "--grid",
        "0,1",
        "--seeds",
        "3,4",
    ]);
    assert_ok(&out, "sweep");
    let table = std::fs::read_to_string(ws.run_dir.join("sweep_depth.tsv")).unwrap();
    assert!(table.starts_with("parameter\tvalue\tseed\tgroup\tmetric\tscore\ttrain_seconds"));
    // 2 grid points * 2 seeds * 2 cutoffs * 2 metrics.
    assert_eq!(table.lines().count(), 1 + 2 * 2 * 2 * 2);

    let out = run(&[
        "sweep",
        "--config",
        ws.config.to_str().unwrap(),
        "--parameter",
        "depth",
        "--grid",
        "",
    ]);
    assert_eq!(out.status.code(), Some(2), "empty grid is a usage error");
}

#[test]
fn stale_lock_blocks_second_writer() {
    let ws = prepared_workspace();
    std::fs::write(ws.run_dir.join(".lock"), "12345\n").unwrap();
    let out = run(&["train", "--config", ws.config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), &target).unwrap();
        }
    }
}
