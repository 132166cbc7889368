use std::path::Path;
use std::process::{Command, Output};

fn qobs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qobs"))
        .args(args)
        .current_dir(dir)
        .env("OBS_CORPUS_DIR", dir)
        .output()
        .expect("binary runs")
}

fn corpus() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = qobs(dir.path(), &["lattice", "export", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn mo2_is_orthomodular_but_not_distributive() {
    let dir = corpus();
    let out = qobs(dir.path(), &["lattice", "check", "--input", "mo2.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("distributive:false"), "{text}");
    assert!(text.contains("orthomodular:true"), "{text}");
}

#[test]
fn corrupted_table_exits_one_with_witness() {
    let dir = corpus();
    let out = qobs(dir.path(), &["obs", "reconstruct", "--table", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("intersection condition"));

    let check = qobs(dir.path(), &["obs", "check", "--table", "bad.json", "--format", "json"]);
    assert_eq!(check.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&check)).unwrap();
    assert_eq!(v["intersection_witness"], serde_json::json!(["1", "a,1"]));
}

#[test]
fn valid_table_reconstructs_its_family() {
    let dir = corpus();
    let out = qobs(
        dir.path(),
        &["obs", "reconstruct", "--table", "mo2_table.json", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        v["reconstructed"]["breakpoints"],
        serde_json::json!([[1.0, "a"], [2.0, "1"]])
    );
}

#[test]
fn suite_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = qobs(dir.path(), &["suite", "--seed", "7"]);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let second = qobs(dir.path(), &["suite", "--seed", "7"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        qobs(dir.path(), &["lattice", "check", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(qobs(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qobs(dir.path(), &["lattice", "check", "--input", "missing.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qobs(dir.path(), &["suite", "--tol", "rec=abc"]).status.code(), Some(2));
}

#[test]
fn non_operator_section_is_reported() {
    let dir = corpus();
    let out = qobs(
        dir.path(),
        &[
            "context",
            "glue",
            "--diagram",
            "qubit_diagram.json",
            "--sections",
            "qubit_sections.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("global_section:true"));
    assert!(text.contains("completely_increasing:false"));
    assert!(text.contains("operator_extendable:false"));
}

#[test]
fn spectral_presheaf_fails_gluing() {
    let dir = corpus();
    let out = qobs(
        dir.path(),
        &["presheaf", "check", "-i", "mo2_presheaf.json", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["existence"], serde_json::Value::Bool(false));
    assert_eq!(v["existence_witness"]["target"], "1");
    assert_eq!(v["existence_witness"]["gluings"], serde_json::json!([]));
}

#[test]
fn step_demo_names_a_discontinuity() {
    let dir = tempfile::tempdir().unwrap();
    let out = qobs(
        dir.path(),
        &["classical", "demo", "--family", "step", "--grid", "-2:2:0.25"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("continuous:false"));
    assert!(text.contains("continuity_witness:[-2.0,-1.875]"), "{text}");
}

#[test]
fn dot_output_is_written() {
    let dir = corpus();
    let dot = dir.path().join("hasse.dot");
    let out = qobs(
        dir.path(),
        &["lattice", "check", "-i", "bool2", "--dot", dot.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn stone_spectrum_of_mo2_has_four_quasipoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = qobs(
        dir.path(),
        &["stone", "quasipoints", "--lattice", "mo2", "--format", "json"],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["quasipoints"], 4);
}
