use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spamsift"));
    c.env_remove("SPAMSIFT_CONFIG");
    c
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_corpus(dir: &Path, missing: bool) {
    std::fs::write(
        dir.join("manifest.csv"),
        "file,url,label\na.html,http://a.example.org/,nonspam\nb.html,http://casino.example.biz/,spam\nc.html,http://c.example.org/,unknown\n",
    )
    .unwrap();
    std::fs::write(dir.join("a.html"), "<body><article>garden notes</article></body>").unwrap();
    if !missing {
        std::fs::write(dir.join("b.html"), "<body>casino poker viagra free</body>").unwrap();
    }
    std::fs::write(dir.join("c.html"), "<body>hello</body>").unwrap();
}

#[test]
fn extract_writes_one_row_per_page() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path(), false);
    let out = dir.path().join("f.csv");
    let stdout = ok(&["extract", "--corpus", s(dir.path()), "--out", s(&out)]);
    assert!(stdout.contains("extracted 3 records"), "{stdout}");
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn unreadable_page_is_skipped_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path(), true);
    let out = dir.path().join("f.csv");
    let res = run(&["extract", "--corpus", s(dir.path()), "--out", s(&out)]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("warning: "));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn spam_fixture_row_has_max_special_keywords() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let cfg = fixtures().join("config.json");
    ok(&["extract", "--corpus", s(&fixtures().join("corpus")), "--config", s(&cfg), "--out", s(&out)]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "key_word_special").unwrap();
    let row = csv.lines().find(|l| l.starts_with("http://cheap-casino-deals.biz/")).unwrap();
    assert_eq!(row.split(',').nth(col).unwrap(), "max");
}

#[test]
fn missing_manifest_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["extract", "--corpus", s(dir.path()), "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("manifest.csv"));
}

#[test]
fn pattern_a_rules_lead_with_the_conjunction() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("a.csv");
    let model = dir.path().join("a.json");
    let dot = dir.path().join("a.dot");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"chaid": {"max_depth": 2}}"#).unwrap();
    let out = ok(&["synth", "--spec", s(&fixtures().join("pattern_a.json")), "--out", s(&data), "--seed", "4"]);
    assert!(out.contains("spam 1073, nonspam 3199"), "{out}");
    ok(&["train", "--data", s(&data), "--config", s(&cfg), "--out", s(&model)]);
    let rules = ok(&["rules", "--model", s(&model), "--dot", s(&dot)]);
    let top = rules.lines().next().unwrap();
    assert!(
        top.starts_with("IF key_word_special in {max} AND key_word_public in {very-max} THEN spam = 87."),
        "{top}"
    );
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph chaid {"));
}

#[test]
fn predict_pure_leaf_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("f.csv");
    let model = dir.path().join("m.json");
    let cfg = fixtures().join("config.json");
    ok(&["extract", "--corpus", s(&fixtures().join("corpus")), "--config", s(&cfg), "--out", s(&data)]);
    ok(&["train", "--data", s(&data), "--config", s(&cfg), "--out", s(&model)]);
    let page = fixtures().join("corpus/spam_fixture.html");
    let out = ok(&[
        "predict", "--model", s(&model), "--page", s(&page), "--url", "http://cheap-casino-deals.biz/", "--config", s(&cfg),
    ]);
    assert!(out.starts_with("spam 1.0000"), "{out}");
    let rows = ok(&["predict", "--model", s(&model), "--data", s(&data)]);
    assert_eq!(rows.lines().count(), 41);
    assert_eq!(rows.lines().next().unwrap(), "url,prediction,spam_probability,leaf,fallback");
}

#[test]
fn evaluate_deterministic_labels_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n": 400, "n_spam": 120, "rules": [{"conditions": {"black_list": "yes"}, "p_spam": 1.0, "weight": 0.3}]}"#,
    )
    .unwrap();
    let data = dir.path().join("d.csv");
    ok(&["synth", "--spec", s(&spec), "--out", s(&data)]);
    let report = dir.path().join("cv.csv");
    let out = ok(&["evaluate", "--data", s(&data), "--folds", "10", "--seed", "3", "--out", s(&report)]);
    assert!(out.contains("F 1.0000"), "{out}");
    let csv = std::fs::read_to_string(&report).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.lines().last().unwrap().starts_with("mean,1.000000,1.000000,1.000000"));
}

#[test]
fn pipeline_outputs_are_byte_identical() {
    let run_once = |dir: &Path| -> Vec<Vec<u8>> {
        let cfg = fixtures().join("config.json");
        let data = dir.join("f.csv");
        let model = dir.join("m.json");
        let report = dir.join("cv.csv");
        ok(&["extract", "--corpus", s(&fixtures().join("corpus")), "--config", s(&cfg), "--out", s(&data)]);
        ok(&["train", "--data", s(&data), "--config", s(&cfg), "--out", s(&model)]);
        ok(&["evaluate", "--data", s(&data), "--config", s(&cfg), "--out", s(&report)]);
        [data, model, report].iter().map(|p| std::fs::read(p).unwrap()).collect()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_once(a.path()), run_once(b.path()));
}

#[test]
fn config_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"chaid": {"alpha_split": 2.0}}"#).unwrap();
    let data = dir.path().join("d.csv");
    ok(&["synth", "--spec", s(&fixtures().join("pattern_b.json")), "--out", s(&data)]);
    let res = bin()
        .env("SPAMSIFT_CONFIG", &cfg)
        .args(["train", "--data", s(&data), "--out", s(&dir.path().join("m.json"))])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha_split"));
}

#[test]
fn corrupt_model_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    std::fs::write(&model, "{\"version\": 1, \"nodes\": [").unwrap();
    assert_eq!(run(&["rules", "--model", s(&model)]).status.code(), Some(3));
    std::fs::write(&model, "{\"version\": 99}").unwrap();
    assert_eq!(run(&["rules", "--model", s(&model)]).status.code(), Some(3));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["predict", "--model", "m.json"]).status.code(), Some(1));
    let expected: &[(&str, &[&str])] = &[
        ("extract", &["--corpus", "--config", "--out"]),
        ("train", &["--data", "--config", "--out"]),
        ("predict", &["--model", "--page", "--url", "--data", "--config"]),
        ("rules", &["--model", "--dot"]),
        ("evaluate", &["--data", "--config", "--folds", "--seed", "--out"]),
        ("synth", &["--spec", "--out", "--seed"]),
    ];
    for (cmd, flags) in expected {
        let help = ok(&[cmd, "--help"]);
        for f in *flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
    }
}
