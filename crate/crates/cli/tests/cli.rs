use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy").join(file)
}

fn convneg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convneg")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn build_toy_lexicon(dir: &Path) -> PathBuf {
    let lexicon = dir.join("toy.lex");
    let out = convneg(&[
        "build-lexicon",
        "--vectors",
        toy("vectors.txt").to_str().unwrap(),
        "--hierarchy",
        toy("hierarchy.tsv").to_str().unwrap(),
        "--dataset",
        toy("dataset.tsv").to_str().unwrap(),
        "--out",
        lexicon.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    lexicon
}

#[test]
fn build_then_evaluate_writes_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = build_toy_lexicon(dir.path());
    let csv = dir.path().join("results.csv");
    let scatter = dir.path().join("scatter.csv");
    let out = convneg(&[
        "evaluate",
        "--lexicon",
        lexicon.to_str().unwrap(),
        "--hierarchy",
        toy("hierarchy.tsv").to_str().unwrap(),
        "--dataset",
        toy("dataset.tsv").to_str().unwrap(),
        "--grid",
        toy("grid.conf").to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--scatter",
        scatter.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(convneg::experiment::RESULT_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // per negation: (3 structural x 2 bases + 2 elementwise + 1 baseline) x 6 measures
    assert_eq!(rows.len(), 2 * (3 * 2 + 2 + 1) * 6);
    for row in &rows {
        assert_eq!(row.len(), 8);
        let n: usize = row[6].parse().unwrap();
        let skipped: usize = row[7].parse().unwrap();
        assert_eq!(n + skipped, 3);
        if row[5] != "null" {
            let r: f64 = row[5].parse().unwrap();
            assert!((-1.0..=1.0).contains(&r));
        }
    }
    let spider_trace = rows
        .iter()
        .find(|r| r[0] == "sub" && r[1] == "spider" && r[2] == "w" && r[4] == "trace")
        .expect("spider row");
    assert!(spider_trace[5].parse::<f64>().unwrap() > 0.9);
    assert!(std::fs::read_to_string(&scatter).unwrap().starts_with(convneg::experiment::SCATTER_HEADER));
}

#[test]
fn negate_text_out_is_one_parsable_line() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = build_toy_lexicon(dir.path());
    let out = convneg(&[
        "negate",
        "--lexicon",
        lexicon.to_str().unwrap(),
        "--hierarchy",
        toy("hierarchy.tsv").to_str().unwrap(),
        "--word",
        "apple",
        "--negation",
        "sub",
        "--composition",
        "phaser",
        "--basis",
        "c",
        "--context-fn",
        "exp",
        "--x",
        "0.5",
        "--text-out",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let line = text.trim_end();
    assert!(!line.contains('\n'));
    let fields: Vec<&str> = line.split('\t').collect();
    assert_eq!(fields[0], "apple");
    let dim: usize = fields[1].parse().unwrap();
    let values: Vec<f64> = fields[2].split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            assert!((values[i * dim + j] - values[j * dim + i]).abs() < 1e-12);
        }
    }
}

#[test]
fn negate_human_output_lists_alternatives() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = build_toy_lexicon(dir.path());
    let out = convneg(&[
        "negate",
        "--lexicon",
        lexicon.to_str().unwrap(),
        "--hierarchy",
        toy("hierarchy.tsv").to_str().unwrap(),
        "--word",
        "apple",
        "--composition",
        "spider",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("not apple"));
    assert!(text.contains("closest alternatives"));
}

#[test]
fn unknown_word_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = build_toy_lexicon(dir.path());
    let out = convneg(&[
        "negate",
        "--lexicon",
        lexicon.to_str().unwrap(),
        "--hierarchy",
        toy("hierarchy.tsv").to_str().unwrap(),
        "--word",
        "zeppelin",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zeppelin"));
}

#[test]
fn verify_small_run_passes() {
    let out = convneg(&["verify", "--seed", "7", "--trials", "20", "--max-dim", "4"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("suites passed"));
}

#[test]
fn verify_rejects_zero_trials() {
    let out = convneg(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_choices_are_rejected_by_the_parser() {
    let out = convneg(&["negate", "--lexicon", "x", "--hierarchy", "y", "--word", "z", "--composition", "tensor"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tensor"));
}

#[test]
fn missing_files_are_reported() {
    let out = convneg(&["build-lexicon", "--vectors", "/nonexistent/v.txt", "--hierarchy", "h", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/v.txt"));
}
