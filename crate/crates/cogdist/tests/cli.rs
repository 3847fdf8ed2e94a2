use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cogdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogdist")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = cogdist(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest_without_timestamp(dir: &Path) -> serde_json::Value {
    let mut m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m.as_object_mut().unwrap().remove("timestamp");
    m
}

/// synth + adjudicate into `root`, returning the adjudicated file.
fn prepared(root: &Path, extra: &[&str], task: &str) -> PathBuf {
    let synth = root.join("synth");
    let mut args = vec!["synth", "--out-dir", s(&synth)];
    args.extend_from_slice(extra);
    ok(&args);
    let adj = root.join("adj");
    ok(&[
        "adjudicate",
        "--input",
        s(&synth.join("corpus.jsonl")),
        "--task",
        task,
        "--out-dir",
        s(&adj),
    ]);
    adj.join("adjudicated.jsonl")
}

#[test]
fn synth_adjudicate_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let adjudicated = prepared(root, &["--docs-per-class", "30", "--seed", "4"], "classify");

    let grid = root.join("grid.json");
    std::fs::write(
        &grid,
        r#"{"c": [1.0], "ngram_range": ["1-2"], "min_df": [1], "max_df": [1.0]}"#,
    )
    .unwrap();
    let eval = root.join("eval");
    ok(&[
        "eval",
        "--input",
        s(&adjudicated),
        "--nested",
        "--outer",
        "3",
        "--grid",
        s(&grid),
        "--out-dir",
        s(&eval),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(eval.join("eval.json")).unwrap()).unwrap();
    assert!(report["weighted"]["f1"].as_f64().unwrap() >= 0.95);
    let csv = std::fs::read_to_string(eval.join("eval.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "Label,N,Precision,Recall,F1");
    assert_eq!(lines.len(), 1 + 15 + 2);
    assert!(lines[16].starts_with("All Examples (Macro),450,"));
    assert!(lines[17].starts_with("All Examples (Weighted),450,"));

    let model_dir = root.join("model");
    let config = root.join("train.json");
    std::fs::write(&config, r#"{"c": 5.0, "min_df": 2}"#).unwrap();
    ok(&[
        "train",
        "--input",
        s(&adjudicated),
        "--config",
        s(&config),
        "--min-df",
        "1",
        "--out-dir",
        s(&model_dir),
    ]);
    let manifest = manifest_without_timestamp(&model_dir);
    assert_eq!(manifest["config"]["pipeline"]["c"], 5.0);
    assert_eq!(manifest["config"]["pipeline"]["min_df"], 1);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);

    let terms = root.join("terms");
    ok(&[
        "terms",
        "--model",
        s(&model_dir.join("model.json")),
        "--k",
        "10",
        "--out-dir",
        s(&terms),
    ]);
    let csv = std::fs::read_to_string(terms.join("terms.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].split(',').count(), 15);
    assert!(rows[0].starts_with("Being Right,Blaming,"));
}

#[test]
fn predict_with_detection_bundle_prints_label_and_probability() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let adjudicated = prepared(
        root,
        &[
            "--docs-per-class",
            "10",
            "--not-distorted-fraction",
            "0.2",
            "--seed",
            "8",
        ],
        "detect",
    );
    let model_dir = root.join("model");
    ok(&["train", "--input", s(&adjudicated), "--out-dir", s(&model_dir)]);
    let out = ok(&[
        "predict",
        "--model",
        s(&model_dir.join("model.json")),
        "--text",
        "blaming1 blaming2 w1 w2",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), 2);
    assert!(["Distorted", "NotDistorted"].contains(&v["label"].as_str().unwrap()));
    let p = v["probability"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn outputs_are_deterministic_and_inputs_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let adjudicated = prepared(root, &["--docs-per-class", "8", "--seed", "1"], "classify");
    let before = std::fs::read(&adjudicated).unwrap();
    for cmd in [
        vec!["split", "--k", "3", "--seed", "2"],
        vec!["cluster"],
        vec!["topics", "--k", "3", "--sweeps", "20"],
        vec!["sim", "--space", "tfidf"],
    ] {
        let (a, b) = (root.join(format!("{}-a", cmd[0])), root.join(format!("{}-b", cmd[0])));
        for out in [&a, &b] {
            let mut args = cmd.clone();
            args.extend(["--input", s(&adjudicated), "--out-dir", s(out)]);
            ok(&args);
        }
        assert_eq!(manifest_without_timestamp(&a), manifest_without_timestamp(&b));
        for name in manifest_without_timestamp(&a)["outputs"].as_array().unwrap() {
            let name = name.as_str().unwrap();
            assert_eq!(
                std::fs::read(a.join(name)).unwrap(),
                std::fs::read(b.join(name)).unwrap(),
                "{name}"
            );
        }
    }
    assert_eq!(std::fs::read(&adjudicated).unwrap(), before);

    let sim = std::fs::read_to_string(root.join("sim-a/similarity.csv")).unwrap();
    let header = sim.lines().next().unwrap();
    assert!(header.starts_with(",Being Right,"));
    assert!(sim.lines().nth(1).unwrap().starts_with("Being Right,1.0000,"));
    let newick = std::fs::read_to_string(root.join("cluster-a/dendrogram.nwk")).unwrap();
    assert!(newick.trim_end().ends_with(';'));
}

#[test]
fn exit_codes_separate_usage_from_pipeline_errors() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = s(root);

    assert_eq!(cogdist(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        cogdist(&["train", "--input", s(&root.join("missing.jsonl")), "--out-dir", out])
            .status
            .code(),
        Some(2)
    );
    let bad_config = root.join("bad.json");
    std::fs::write(&bad_config, r#"{"c": "high"}"#).unwrap();
    let single = root.join("single.jsonl");
    std::fs::write(
        &single,
        "{\"id\":\"a\",\"text\":\"x y\",\"label\":\"Blaming\"}\n{\"id\":\"b\",\"text\":\"y z\",\"label\":\"Blaming\"}\n",
    )
    .unwrap();
    assert_eq!(
        cogdist(&[
            "train",
            "--input",
            s(&single),
            "--config",
            s(&bad_config),
            "--out-dir",
            out
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        cogdist(&["train", "--input", s(&single), "--c", "0", "--out-dir", out])
            .status
            .code(),
        Some(2)
    );
    let failed = cogdist(&["train", "--input", s(&single), "--out-dir", out]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(!failed.stderr.is_empty());

    let corpus = root.join("corpus.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\":\"a\",\"text\":\"x\",\"annotations\":[{\"annotator\":\"q\",\"labels\":[\"Nope\"]}]}\n",
    )
    .unwrap();
    let bad = cogdist(&["ingest", "--input", s(&corpus), "--out-dir", out]);
    assert_eq!(bad.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("line 1") && msg.contains("Nope"), "{msg}");
}
