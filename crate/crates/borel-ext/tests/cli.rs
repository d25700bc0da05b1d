#![cfg(feature = "cli")]

use std::path::Path;
use std::process::{Command, Output};

use borel_ext::chart::{render_svg, ChartDocument};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_borel-ext"))
        .args(args)
        .env_remove("BOREL_EXT_CACHE")
        .output()
        .expect("the binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn ext_prints_a_chart() {
    let o = run(&["ext", "S:0", "--smax", "3", "--tmax", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "ext");
    assert_eq!(v["module"], "S:0");
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["s"] == 1 && e["t"] == 4));
}

#[test]
fn bad_specs_exit_with_two() {
    let o = run(&["ext", "P:2:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty cell range (at position 4)"), "{}", stderr(&o));

    let o = run(&["validate", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));

    let o = run(&["borel", "--stem-max", "31"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_files_are_checked_and_used() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "s_max = 3\n").unwrap();
    let o = run(&["--config", path(&bad), "ext", "S:0"]);
    assert_eq!(o.status.code(), Some(2));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, "smax = 2\ntmax = 5\n").unwrap();
    let o = run(&["--config", path(&good), "ext", "S:0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["s_max"].as_u64(), v["t_max"].as_i64()), (Some(2), Some(5)));
}

#[test]
fn borel_pages_render_identically() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("page.json");
    let svg = dir.path().join("page.svg");
    let o = run(&[
        "borel", "--coweight", "3", "--stem-max", "12", "--smax", "6", "--json", path(&json), "--svg", path(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = ChartDocument::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    doc.check().unwrap();
    assert_eq!(std::fs::read_to_string(&svg).unwrap(), render_svg(&doc));

    let again = dir.path().join("again.svg");
    let o = run(&["render", path(&json), "--svg", path(&again)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(&again).unwrap());

    std::fs::write(&json, "{}").unwrap();
    assert_eq!(run(&["render", path(&json)]).status.code(), Some(2));
}

#[test]
fn several_coweights_need_directories() {
    let o = run(&["borel", "--coweight", "0", "1", "--stem-max", "4", "--smax", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--json DIR"));
}

#[test]
fn mahowald_names_the_image() {
    let o = run(&["mahowald", "h0", "--depth", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "h0 -> h1[-2]");
}

#[test]
fn validate_reports_and_exits_zero_on_success() {
    let o = run(&["validate", "cobar"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().filter(|l| l.starts_with("PASS cobar")).count(), 4);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cobar"].as_array().unwrap().len(), 4);
}
