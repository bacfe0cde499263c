use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cvngs(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvngs"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn manifest(dir: &Path, body: &str) -> String {
    let p = dir.join("input.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gain_solve_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(dir.path(), &["gain-solve"]);
    assert_eq!(out.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed["status"], "ok");
    assert_eq!(printed, report(dir.path()));
    let csv = fs::read_to_string(dir.path().join("gains.csv")).unwrap();
    assert!(csv.starts_with("R,g_p_dB,g_F_dB,g_x_dB\n"));
}

#[test]
fn json_format_writes_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(dir.path(), &["--format", "json", "gain-solve"]);
    assert_eq!(out.status.code(), Some(0));
    let t: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("gains.json")).unwrap()).unwrap();
    assert_eq!(t["columns"][0], "R");
    assert!(t["rows"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn empty_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        dir.path(),
        r#"{ "command": "entanglement-sweep", "sweep": { "reflectivity": [], "squeeze_db": [-6.0] } }"#,
    );
    let out = cvngs(dir.path(), &["run", "--manifest", &m]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["status"], "error");
    assert!(r["error"].as_str().unwrap().contains("empty"));
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), r#"{ "command": "gain-solve", "bogus": 1 }"#);
    let out = cvngs(dir.path(), &["run", "--manifest", &m]);
    assert_eq!(out.status.code(), Some(2));
    assert!(report(dir.path())["error"]
        .as_str()
        .unwrap()
        .contains("bogus"));
}

#[test]
fn out_of_range_parameter_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        dir.path(),
        r#"{ "command": "gain-solve", "pulse": { "reflectivity": 1.5 } }"#,
    );
    assert_eq!(
        cvngs(dir.path(), &["run", "--manifest", &m]).status.code(),
        Some(2)
    );
}

#[test]
fn unknown_figure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(dir.path(), &["figures", "--which", "fig9z"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subcommand_must_match_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), r#"{ "command": "gain-solve" }"#);
    assert_eq!(
        cvngs(dir.path(), &["eps", "--manifest", &m]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_manifest_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(
        dir.path(),
        &["run", "--manifest", "/nonexistent/manifest.json"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn figure_list_names_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(dir.path(), &["figures", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["fig2a", "fig3d", "fig4b", "figS6f"] {
        assert!(text.contains(id), "{id}");
    }
}

#[test]
fn grid_flag_overrides_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvngs(dir.path(), &["--grid", "-4,4,21", "eps"]);
    assert_eq!(out.status.code(), Some(0));
    let env: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("wigner.json")).unwrap()).unwrap();
    assert_eq!(env["x"]["n"], 21);
    assert_eq!(env["x"]["min"], -4.0);
    let rows = fs::read_to_string(dir.path().join("wigner.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 21 * 21 + 1);
}
