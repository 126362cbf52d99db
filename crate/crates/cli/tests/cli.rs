use std::path::Path;
use std::process::{Command, Output};

fn tracebot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracebot")).args(args).env("TRACEBOT_THREADS", "2").output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &[&str] = &[
    "--d-model", "16", "--layers", "1", "--heads", "2", "--max-len", "16", "--behavior-dim", "8", "--epochs", "2", "--batch-size", "16",
];

#[test]
fn synth_train_then_reuse_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = tracebot(&["synth", "--humans", "30", "--bots", "40", "--seed", "2", "--out", p(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (users, tweets, labels) = (data.join("users.jsonl"), data.join("tweets.jsonl"), data.join("labels.jsonl"));

    let out = tracebot(&["ingest", "--users", p(&users), "--tweets", p(&tweets), "--labels", p(&labels)]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((summary["humans"].as_u64(), summary["bots"].as_u64()), (Some(30), Some(40)));

    let run = dir.path().join("run");
    let mut args = vec!["train", "--users", p(&users), "--tweets", p(&tweets), "--labels", p(&labels), "--output", p(&run)];
    args.extend_from_slice(SMALL);
    let out = tracebot(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["test_counts"], report["test_counts_pre_undersampling"]);
    for f in ["metrics.json", "history.csv", "embeddings.csv", "checkpoint.tbm"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }

    let ckpt = run.join("checkpoint.tbm");
    let eval = dir.path().join("eval");
    let out = tracebot(&["evaluate", "--checkpoint", p(&ckpt), "--users", p(&users), "--tweets", p(&tweets), "--labels", p(&labels), "--output", p(&eval)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(eval.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["config_hash"], report["config_hash"]);

    let out = tracebot(&["predict", "--checkpoint", p(&ckpt), "--users", p(&users), "--tweets", p(&tweets)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("user_id,label,confidence,p_bot\n"));
    assert_eq!(csv.lines().count(), 71);

    let out = tracebot(&["export-embeddings", "--checkpoint", p(&ckpt), "--users", p(&users), "--tweets", p(&tweets)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next().unwrap().split(',').count(), 2 + 16 + 8);

    let feats = dir.path().join("feats");
    let out = tracebot(&["featurize", "--users", p(&users), "--tweets", p(&tweets), "--labels", p(&labels), "--output", p(&feats)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header = std::fs::read_to_string(feats.join("features.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 3 + 40);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"unknown_key\": 1}").unwrap();
    assert_eq!(tracebot(&["train", "--config", p(&bad)]).status.code(), Some(2));
    assert_eq!(tracebot(&["train", "--heads", "3", "--d-model", "16"]).status.code(), Some(2));
    assert_eq!(tracebot(&["ablate", "--ablations", "full,bogus"]).status.code(), Some(2));
    assert_eq!(tracebot(&["study-robust", "--ratios", "1-3"]).status.code(), Some(2));

    let missing = dir.path().join("missing.jsonl");
    assert_eq!(tracebot(&["ingest", "--users", p(&missing), "--tweets", p(&missing)]).status.code(), Some(3));
    let junk = dir.path().join("junk.tbm");
    std::fs::write(&junk, b"not a checkpoint").unwrap();
    let users = dir.path().join("users.jsonl");
    std::fs::write(&users, "").unwrap();
    assert_eq!(tracebot(&["predict", "--checkpoint", p(&junk), "--users", p(&users), "--tweets", p(&users)]).status.code(), Some(3));
}
