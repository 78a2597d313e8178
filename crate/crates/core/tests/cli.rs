mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hysubj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hysubj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

struct Fixtures {
    lexicon: String,
    corpus: String,
}

fn fixtures() -> Fixtures {
    Fixtures {
        lexicon: common::fixture("lexicon_l0.tsv").display().to_string(),
        corpus: common::fixture("scoring_corpus.tsv").display().to_string(),
    }
}

const SMALL_ENCODERS: [&str; 4] = ["--embed-a", "hash:16:0", "--embed-b", "hash:16:1"];

fn train_model(dir: &TempDir, extra: &[&str]) -> (String, Output) {
    let f = fixtures();
    let model = dir.path().join("model.json");
    let mut args = vec!["train", &f.corpus, "--lexicon", &f.lexicon, "--out", path_str(&model)];
    args.extend(SMALL_ENCODERS);
    args.extend(extra);
    let out = hysubj(&args);
    (model.display().to_string(), out)
}

#[test]
fn analyze_writes_one_line_per_sentence() {
    let f = fixtures();
    let out = hysubj(&["analyze", &f.corpus, "--lexicon", &f.lexicon]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 30);
    assert_eq!(lines[0]["id"], "s01");
    assert_eq!(lines[0]["n_words"], 3);
    assert_eq!(lines[0]["counts"]["VD"], 1);
    assert_eq!(lines[0]["terms"][0], "tall");
    let s1 = lines[0]["scores"][0].as_f64().unwrap();
    assert!((s1 - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn missing_lexicon_names_the_path() {
    let f = fixtures();
    let out = hysubj(&["analyze", &f.corpus, "--lexicon", "/nonexistent/lexicon.tsv"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/nonexistent/lexicon.tsv"), "{}", stderr(&out));
}

#[test]
fn empty_corpus_gives_no_output() {
    let f = fixtures();
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let out = hysubj(&["analyze", path_str(&empty), "--lexicon", &f.lexicon]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn train_lowers_the_loss() {
    let dir = TempDir::new().unwrap();
    let (model, out) = train_model(&dir, &["--learning-rate", "0.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("final training loss: "));
    let csv = std::fs::read_to_string(dir.path().join("model.loss.csv")).unwrap();
    let losses: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 31);
    assert!(losses[30] < losses[0]);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(model).unwrap()).unwrap();
    assert_eq!(json["dims"]["head_in"], 9);
}

#[test]
fn full_variant_and_zero_epochs() {
    let dir = TempDir::new().unwrap();
    let (model, out) = train_model(&dir, &["--variant", "roberta+sbert+terms+scores", "--epochs", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(model).unwrap()).unwrap();
    assert_eq!(json["dims"]["head_in"], 9);
    assert_eq!(json["config"]["use_vago_terms"], true);
    let csv = std::fs::read_to_string(dir.path().join("model.loss.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn evaluate_reports_metrics_and_sweep() {
    let f = fixtures();
    let dir = TempDir::new().unwrap();
    let (model, out) = train_model(&dir, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let roc = dir.path().join("roc.csv");
    let preds = dir.path().join("preds.tsv");
    let mut args = vec![
        "evaluate",
        &f.corpus,
        "--model",
        &model,
        "--lexicon",
        &f.lexicon,
        "--sweep",
        "--roc-csv",
        path_str(&roc),
        "--predictions",
        path_str(&preds),
    ];
    args.extend(SMALL_ENCODERS);
    let out = hysubj(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let macro_f1 = report["macro_f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&macro_f1));
    let sweep = &report["sweep"];
    // 0.5 is on the grid, so the sweep can only do better
    assert!(sweep["macro_f1"].as_f64().unwrap() >= macro_f1);
    assert!(std::fs::read_to_string(&roc).unwrap().starts_with("fpr,tpr\n"));

    let swept = hysubj(&["sweep", path_str(&preds)]);
    assert!(swept.status.success(), "{}", stderr(&swept));
    let swept: Value = serde_json::from_str(&stdout(&swept)).unwrap();
    assert_eq!(swept["threshold"], sweep["threshold"]);
    assert_eq!(swept["macro_f1"], sweep["macro_f1"]);

    // exhaustive search over the grid from the written predictions
    let rows: Vec<(f64, bool)> = std::fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[1].parse().unwrap(), f[2] == "SUBJ")
        })
        .collect();
    let f1 = |tp: usize, other: usize| {
        if tp + other == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + other) as f64
        }
    };
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let tp = rows.iter().filter(|r| r.0 >= t && r.1).count();
        let fp = rows.iter().filter(|r| r.0 >= t && !r.1).count();
        let fn_ = rows.iter().filter(|r| r.0 < t && r.1).count();
        let tn = rows.len() - tp - fp - fn_;
        let m = (f1(tp, fp + fn_) + f1(tn, fp + fn_)) / 2.0;
        if m > best.1 + 1e-12 {
            best = (t, m);
        }
    }
    assert_eq!(swept["threshold"].as_f64().unwrap(), best.0);
}

#[test]
fn evaluate_rejects_mismatched_dimensions() {
    let f = fixtures();
    let dir = TempDir::new().unwrap();
    let (model, out) = train_model(&dir, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = hysubj(&[
        "evaluate",
        &f.corpus,
        "--model",
        &model,
        "--lexicon",
        &f.lexicon,
        "--embed-a",
        "hash:32:0",
        "--embed-b",
        "hash:16:1",
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("32") && err.contains("16"), "{err}");
}

#[test]
fn audit_and_lexicon_stats() {
    let f = fixtures();
    let out = hysubj(&["audit", &f.corpus, "--lexicon", &f.lexicon, "--term", "approximately"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let audit: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(audit["category"], "VA");
    assert_eq!(audit["containing"], 5);

    let lexicon_1614 = common::fixture("lexicon_1614.tsv").display().to_string();
    let out = hysubj(&["lexicon-stats", "--lexicon", &lexicon_1614]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().trim_end().ends_with("1614"), "{text}");
    assert!(text.contains("1500"));
}

#[test]
fn output_may_not_overwrite_an_input() {
    let f = fixtures();
    let out = hysubj(&["analyze", &f.corpus, "--lexicon", &f.lexicon, "--out", &f.corpus]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("collides"));
}
