use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlsurr(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsurr"))
        .args(args)
        .env("NLSURR_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_the_requested_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    ok(&nlsurr(&["generate", "--system", "logistic", "--L", "32", "--N", "4", "--seed", "1", "--out", s(&a)], tmp.path()));
    let csv = fs::read_to_string(a.join("realizations.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(',').count() == 32));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("realizations.json")).unwrap()).unwrap();
    assert_eq!(meta["system"], "logistic");
    assert_eq!(meta["L"], 32);

    let b = tmp.path().join("b");
    ok(&nlsurr(&["generate", "--system", "logistic", "--L", "32", "--N", "4", "--seed", "1", "--out", s(&b)], tmp.path()));
    assert_eq!(fs::read(a.join("realizations.csv")).unwrap(), fs::read(b.join("realizations.csv")).unwrap());
}

#[test]
fn unknown_system_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlsurr(&["generate", "--system", "duffing", "--L", "32", "--N", "4"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[usage]"));
}

#[test]
fn zero_length_pipeline_is_rejected_before_work() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlsurr(&["pipeline", "--L", "0", "--out", s(&tmp.path().join("run"))], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[config]"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn stages_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("gen");
    ok(&nlsurr(&["generate", "--system", "henon", "--L", "16", "--N", "12", "--seed", "2", "--out", s(&g)], tmp.path()));
    let real = g.join("realizations.csv");

    let su = tmp.path().join("surr");
    ok(&nlsurr(&["surrogate", "--input", s(&real), "--seed", "2", "--out", s(&su)], tmp.path()));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(su.join("surrogate_report.json")).unwrap()).unwrap();
    assert_eq!(rep["pairs"], 12);

    let d = tmp.path().join("data");
    ok(&nlsurr(
        &["dataset", "--input", s(&real), "--surrogates", s(&su.join("surrogates.csv")), "--seed", "2", "--out", s(&d)],
        tmp.path(),
    ));
    let csv = fs::read_to_string(d.join("dataset.csv")).unwrap();
    assert!(csv.starts_with("pair_id,label,split,s_0,"));
    assert_eq!(csv.lines().count(), 1 + 24);

    let t = tmp.path().join("train");
    ok(&nlsurr(
        &["train", "--dataset", s(&d.join("dataset.csv")), "--hidden", "3", "--epochs", "7", "--seed", "2", "--out", s(&t)],
        tmp.path(),
    ));
    assert!(t.join("model.json").is_file());
    let report_csv = t.join("train_report.csv");
    assert_eq!(fs::read_to_string(&report_csv).unwrap().lines().count(), 8);

    let line = ok(&nlsurr(&["report", "--report", s(&report_csv)], tmp.path()));
    assert_eq!(line.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert!(v["representative_epoch"].as_u64().unwrap() >= 1);
    assert_eq!(v["binomial"]["trials"], 6);

    // without the sidecar the test size must be given
    let bare = tmp.path().join("bare.csv");
    fs::copy(&report_csv, &bare).unwrap();
    assert_eq!(nlsurr(&["report", "--report", s(&bare)], tmp.path()).status.code(), Some(2));
    ok(&nlsurr(&["report", "--report", s(&bare), "--n-test", "6"], tmp.path()));
}

#[test]
fn pipeline_flags_override_config_file_and_default_root_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"system": "logistic", "L": 16, "N": 20, "hidden": 3, "epochs": 50, "seed": 4}"#).unwrap();
    let line = ok(&nlsurr(&["pipeline", "--config", s(&cfg), "--epochs", "3"], tmp.path()));
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["epochs"], 3);
    assert_eq!(v["L"], 16);
    let dir = tmp.path().join("logistic_L16_N20_H3_seed4");
    assert!(dir.join("verdict.json").is_file());

    // rerunning from the frozen config reproduces the verdict
    let again = tmp.path().join("again");
    let line2 = ok(&nlsurr(&["pipeline", "--config", s(&dir.join("config.json")), "--out", s(&again)], tmp.path()));
    assert_eq!(line, line2);
    assert_eq!(fs::read(dir.join("dataset.csv")).unwrap(), fs::read(again.join("dataset.csv")).unwrap());
}

#[test]
fn malformed_input_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "1,2,3,4,5,6,7,8\n1,2,x,4,5,6,7,8\n").unwrap();
    let out = nlsurr(&["surrogate", "--input", s(&bad), "--out", s(&tmp.path().join("o"))], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
