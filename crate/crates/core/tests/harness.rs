use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn lab(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .current_dir(dir)
        .env("LAB_THREADS", "2")
        .args(args)
        .output()
        .expect("lab runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("lab-out").join(name)).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn lemma_writes_csv_and_passes() {
    let dir = TempDir::new().unwrap();
    let (code, stdout, _) = lab(dir.path(), &["lemma", "--eps", "0.25,1", "--grid", "64", "--jmax", "64"]);
    assert_eq!(code, 0, "{stdout}");
    let rows = data_rows(&read(dir.path(), "lemma.csv"));
    assert_eq!(
        &rows[0][..7],
        &["epsilon", "paper_bound", "eps_over_5", "minimax_value", "slack", "pulse_sum", "pulse_bound"]
    );
    assert_eq!(rows.len(), 3);
    let bound: f64 = rows[2][1].parse().unwrap();
    assert!((bound - 0.21995).abs() < 1e-5);
    assert_eq!(rows[2][2], "0.2");
}

#[test]
fn lemma_empty_list_is_noop() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = lab(dir.path(), &["lemma", "--eps", ""]);
    assert_eq!(code, 0);
    assert!(!dir.path().join("lab-out/lemma.csv").exists());
}

#[test]
fn outputs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(lab(d.path(), &["lemma", "--eps", "0.5", "--grid", "48", "--jmax", "48"]).0, 0);
        assert_eq!(lab(d.path(), &["decay", "--builtin", "cantor", "--jmax", "4096"]).0, 0);
    }
    for f in ["lemma.csv", "decay.csv", "decay.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    assert!(read(a.path(), "decay.csv").starts_with("# fourier-lab"));
    let json: serde_json::Value = serde_json::from_str(&read(a.path(), "decay.json")).unwrap();
    assert_eq!(json["header"]["command"], "decay");
}

#[test]
fn construct_small_spec_with_oracle() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("spec.json"), r#"{"s": 0.9, "b": 0.3, "l": [2, 6], "depth": 12}"#).unwrap();
    let (code, stdout, stderr) = lab(dir.path(), &["construct", "--spec", "spec.json", "--oracle"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert!(stdout.contains("stage-masses-vs-enumeration"));
    let rows = data_rows(&read(dir.path(), "stages.csv"));
    assert_eq!(&rows[0][..7], &["k", "j", "alpha", "threshold", "in_P", "witness_bound", "energy_bound"]);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["summary"]["lambda_sum"], 1.0);
    let sets: serde_json::Value = serde_json::from_str(&read(dir.path(), "sets.json")).unwrap();
    assert_eq!(sets["sets"][0]["name"], "A");
}

#[test]
fn construct_rejects_bad_spec() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"s": 0.5, "b": 0.3, "l": [4]}"#).unwrap();
    let (code, _, stderr) = lab(dir.path(), &["construct", "--spec", "bad.json"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("sqrt(3) - 1"), "{stderr}");
    let (code, _, stderr) = lab(dir.path(), &["construct", "--spec", "missing.json"]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error:"));
}

#[test]
fn decay_builtins() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = lab(dir.path(), &["decay", "--builtin", "lebesgue", "--jmax", "4096"]);
    assert_eq!(code, 0);
    let rows = data_rows(&read(dir.path(), "decay.csv"));
    assert_eq!(rows[0], ["band_lo", "band_hi", "sup_abs", "j_star"]);
    assert_eq!(rows.len(), 13);
    let (code, _, stderr) = lab(dir.path(), &["decay", "--builtin", "sierpinski"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("unknown builtin"));
}

#[test]
fn decay_measure_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("mu.json"), r#"{"depth": 2, "weights": [0.1, 0.4, 0.4, 0.1]}"#).unwrap();
    let (code, stdout, stderr) =
        lab(dir.path(), &["decay", "--measure", "mu.json", "--jmax", "1024", "--grid", "half-integer"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let (code, _, _) = lab(dir.path(), &["decay", "--measure", "nope.json"]);
    assert_eq!(code, 1);
}

#[test]
fn oracle_subcommand_green() {
    let dir = TempDir::new().unwrap();
    let (code, stdout, _) = lab(dir.path(), &["oracle"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn bad_thread_count() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .current_dir(dir.path())
        .env("LAB_THREADS", "zero")
        .args(["oracle"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
