use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn multiref(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiref"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    _dir: TempDir,
    dataset: PathBuf,
    hyps: PathBuf,
    ratings: PathBuf,
    embeddings: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, body).unwrap();
            p
        };
        let mut ds = String::new();
        let mut hy = String::new();
        let mut ra = String::new();
        let refs = [
            "i am fine",
            "good to see you",
            "not much",
            "see you soon",
            "that is fine",
        ];
        for c in 0..5 {
            ds.push_str(&format!(
                r#"{{"context_id":"c{c}","context":["how are you"],"reference":"{}","multi_references":["{}","{}"]}}"#,
                refs[c],
                refs[(c + 1) % 5],
                refs[(c + 2) % 5]
            ));
            ds.push('\n');
            for m in 0..3 {
                hy.push_str(&format!(
                    r#"{{"context_id":"c{c}","model_id":"m{m}","hypotheses":["{}","you are fine"]}}"#,
                    refs[(c + 2 * m) % 5]
                ));
                hy.push('\n');
                for r in 0..3 {
                    let v = 1 + (c + 2 * m + r / 2) % 5;
                    ra.push_str(&format!(
                        r#"{{"context_id":"c{c}","model_id":"m{m}","rater_id":"r{r}","kind":"appropriateness","value":{v}}}"#
                    ));
                    ra.push('\n');
                }
            }
        }
        let emb = "5 2\ni 1 0\nam 0 1\nfine 0.5 0.5\nyou 1 1\nsee -1 0\n";
        Fixture {
            dataset: write("ds.jsonl", &ds),
            hyps: write("hyps.jsonl", &hy),
            ratings: write("ratings.jsonl", &ra),
            embeddings: write("emb.txt", emb),
            _dir: dir,
        }
    }

    fn dir(&self) -> &Path {
        self.dataset.parent().unwrap()
    }

    fn s(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    fn score(&self, extra: &[&str]) -> Output {
        let mut args = vec![
            "score",
            "--dataset",
            Self::s(&self.dataset),
            "--hyps",
            Self::s(&self.hyps),
        ];
        args.extend_from_slice(extra);
        multiref(&args)
    }
}

#[test]
fn score_writes_report_and_csv() {
    let f = Fixture::new();
    let csv = f.dir().join("out.csv");
    let out = f.score(&["--metrics", "bleu2,rouge_l", "--csv", Fixture::s(&csv)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["per_utterance"].as_array().unwrap().len(), 5 * 3 * 2);
    assert_eq!(v["mode"], "multi");
    assert!(v["run_manifest"]["inputs"]["dataset"]["sha256"].as_str().unwrap().len() == 64);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("context_id,model_id,hypothesis_index,metric,single,multi,score\n"));
    assert_eq!(text.lines().count(), 1 + 30);
}

#[test]
fn output_is_deterministic() {
    let f = Fixture::new();
    let a = f.score(&["--metrics", "bleu1,bleu2,meteor,rouge_l"]);
    let b = f.score(&["--metrics", "bleu1,bleu2,meteor,rouge_l"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_metric_is_usage_error() {
    let f = Fixture::new();
    let out = f.score(&["--metrics", "bleu9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bleu9"));
}

#[test]
fn embedding_metric_needs_table() {
    let f = Fixture::new();
    let out = f.score(&["--metrics", "vector_extrema"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--embeddings"));

    let out = f.score(&[
        "--metrics",
        "vector_extrema,greedy_matching",
        "--embeddings",
        Fixture::s(&f.embeddings),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn bad_parameters_are_usage_errors() {
    let f = Fixture::new();
    assert_eq!(
        f.score(&["--metrics", "bleu2", "--bleu-max-n", "7"]).status.code(),
        Some(2)
    );
    assert_eq!(multiref(&[]).status.code(), Some(2));
    assert_eq!(multiref(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(multiref(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_input_names_the_line() {
    let f = Fixture::new();
    let bad = f.dir().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"context_id\":\"x\",\"context\":[\"hi\"],\"reference\":\"yo\"}\n{not json\n",
    )
    .unwrap();
    let out = multiref(&["validate", "--dataset", Fixture::s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":2"), "{}", stderr(&out));

    let dup = f.dir().join("dup.jsonl");
    let line = "{\"context_id\":\"x\",\"context\":[\"hi\"],\"reference\":\"yo\"}\n";
    std::fs::write(&dup, line.repeat(2)).unwrap();
    let out = multiref(&["validate", "--dataset", Fixture::s(&dup)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x"));
}

#[test]
fn validate_accepts_fixture() {
    let f = Fixture::new();
    let out = multiref(&[
        "validate",
        "--dataset",
        Fixture::s(&f.dataset),
        "--hyps",
        Fixture::s(&f.hyps),
        "--ratings",
        Fixture::s(&f.ratings),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 5 contexts"));
}

#[test]
fn ablate_k_beyond_references_is_rejected() {
    let f = Fixture::new();
    let out = multiref(&[
        "ablate",
        "--dataset",
        Fixture::s(&f.dataset),
        "--hyps",
        Fixture::s(&f.hyps),
        "--ratings",
        Fixture::s(&f.ratings),
        "--metrics",
        "bleu2",
        "--k-values",
        "4",
        "--no-rater-filter",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ablate_csv_columns() {
    let f = Fixture::new();
    let csv = f.dir().join("ablate.csv");
    let out = multiref(&[
        "ablate",
        "--dataset",
        Fixture::s(&f.dataset),
        "--hyps",
        Fixture::s(&f.hyps),
        "--ratings",
        Fixture::s(&f.ratings),
        "--metrics",
        "bleu2,rouge_l",
        "--no-rater-filter",
        "--csv",
        Fixture::s(&csv),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("k,metric,pearson,pearson_p,spearman,spearman_p,n\n"));
    // k = 1..=3 for two metrics.
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn kappa_and_stats_run() {
    let f = Fixture::new();
    let out = multiref(&["kappa", "--ratings", Fixture::s(&f.ratings)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["per_rater"].as_object().unwrap().len(), 3);

    let out = multiref(&["stats", "--dataset", Fixture::s(&f.dataset)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["records"], 5);
    assert!(v["gt_bleu"]["2"].is_number());
}
