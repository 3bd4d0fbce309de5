use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn codemix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codemix"))
        .args(args)
        .env_remove("CODEMIX_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let o = codemix(&["synth", "--out-dir", s(&data), "--n-train", "150", "--n-validation", "60", "--n-test", "60"]);
    assert!(o.status.success(), "{}", stderr(&o));
    data
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let o = codemix(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage: codemix"));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(codemix(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn stats_on_fixture() {
    let o = codemix(&["stats", "--input", s(&fixture("train20.txt"))]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "total\t20\nnegative\t6\nneutral\t8\npositive\t6\n\
         tokens_Hin\t80\ntokens_Eng\t30\ntokens_O\t17\n\
         unique_Hin\t60\nunique_Eng\t27\nunique_O\t13\n"
    );
}

#[test]
fn missing_file_exits_1_naming_the_path() {
    let o = codemix(&["stats", "--input", "/no/such/corpus.txt"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("/no/such/corpus.txt"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_corpus_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "hello\tEng\nmeta\t1\tpositive\n").unwrap();
    let o = codemix(&["ingest", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.txt") && err.contains("line 1"), "{err}");
}

#[test]
fn conflicting_flags_are_named() {
    let o = codemix(&["experiment", "--grid", "exp1", "--spec", "x.spec", "--data-dir", "."]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--grid") && err.contains("--spec"), "{err}");
    let o = codemix(&["experiment", "--grid", "exp6", "--data-dir", "."]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exp9-iter4"));
}

#[test]
fn ingest_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for out in [&a, &b] {
        assert!(codemix(&["ingest", "--input", s(&fixture("train20.txt")), "--out", s(out)]).status.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert!(codemix(&["ingest", "--input", s(&a), "--out", s(&b)]).status.success());
    assert_eq!(first, std::fs::read(&b).unwrap());
}

#[test]
fn resource_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (nd, sw, cleaned) = (dir.path().join("nd.tsv"), dir.path().join("sw.txt"), dir.path().join("c.tsv"));
    let train = fixture("train20.txt");
    assert!(codemix(&["build-normdict", "--freq-from", s(&train), "--curated", s(&fixture("curated_rows.tsv")), "--out", s(&nd)])
        .status
        .success());
    let dict = std::fs::read_to_string(&nd).unwrap();
    assert!(dict.lines().any(|l| l.starts_with("aacha\t") && l.contains("achha")));
    assert!(codemix(&["derive-stopwords", "--corpus", s(&train), "--out", s(&sw)]).status.success());
    let stopwords = std::fs::read_to_string(&sw).unwrap();
    assert!(stopwords.lines().all(|w| (1..=3).contains(&w.chars().count())));
    let o = codemix(&[
        "clean", "--input", s(&train), "--stage", "5", "--normdict", s(&nd), "--hindi-stopwords", s(&sw), "--out", s(&cleaned),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = std::fs::read_to_string(&cleaned).unwrap();
    assert_eq!(rows.lines().count(), 20);
    assert!(rows.starts_with("1001\tneutral\t"));
    let vec_file = dir.path().join("v.json");
    let matrix = dir.path().join("x.txt");
    let o = codemix(&[
        "featurize", "--input", s(&cleaned), "--vectorizer", "onehot", "--ngrams", "1,2", "--out", s(&vec_file), "--matrix", s(&matrix),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&vec_file).unwrap().contains("codemix-vectorizer"));
    assert_eq!(std::fs::read_to_string(&matrix).unwrap().lines().count(), 20);
}

#[test]
fn train_predict_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let model = dir.path().join("model.json");
    let o = codemix(&["train", "--data-dir", s(&data), "--model", "logreg", "--stage", "3", "--out", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let preds = dir.path().join("preds.tsv");
    let o = codemix(&["predict", "--model", s(&model), "--input", s(&data.join("test.txt")), "--out", s(&preds)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&preds).unwrap();
    assert_eq!(text.lines().count(), 60);
    assert!(text.lines().all(|l| l.starts_with("te") && l.split('\t').count() == 2));

    let o = codemix(&["eval", "--model", s(&model), "--input", s(&data.join("test.txt"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = String::from_utf8(o.stdout).unwrap();
    let f1: f64 = report.lines().next().unwrap().strip_prefix("macro_f1\t").unwrap().parse().unwrap();
    assert!(f1 > 0.8, "{report}");

    // labels from a separate file
    let o = codemix(&[
        "eval", "--model", s(&model), "--input", s(&fixture("test3.txt")), "--labels", s(&fixture("test3_labels.csv")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = codemix(&["eval", "--model", s(&model), "--input", s(&fixture("test3.txt"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn experiment_grid_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = codemix(&["experiment", "--grid", "synthetic", "--data-dir", s(&data), "--jobs", jobs, "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), 10);
}

#[test]
fn experiment_spec_file_with_env_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let spec = dir.path().join("runs.spec");
    std::fs::write(&spec, "stage = 3\nvectorizer = count\nmodel = mnb\n---\nstage = 2\nvectorizer = tfidf\nmodel = svm\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_codemix"))
        .args(["experiment", "--spec", s(&spec), "--format", "text", "--split", "validation"])
        .env("CODEMIX_DATA_DIR", &data)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("F1-Score"));
    assert_eq!(text.lines().count(), 3, "{text}");
}
