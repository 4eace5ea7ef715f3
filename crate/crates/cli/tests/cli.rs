//! End-to-end tests of the command-line interface, driving the built
//! binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grigcalc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn temp_spec(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("grigcalc-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn element_queries() {
    assert_eq!(stdout(&["element", "section", "b", "--vertex", "0"]).trim(), "a");
    assert_eq!(stdout(&["element", "trivial", "b c d"]).trim(), "true");
    assert_eq!(stdout(&["element", "trivial", "a b"]).trim(), "false");
    assert_eq!(stdout(&["element", "order", "a c"]).trim(), "8");
    assert_eq!(stdout(&["element", "eval", "a", "--vertex", "00"]).trim(), "10");
    assert_eq!(
        stdout(&["element", "order", "a b", "--cap", "8"]).trim(),
        "unresolved (cap 8)"
    );
}

#[test]
fn element_json_schema() {
    let out = stdout(&["--json", "element", "trivial", "b c d"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["op"], "trivial");
    assert_eq!(v["trivial"], true);

    let out = stdout(&["--json", "element", "section", "b", "--vertex", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["section"], "c");
}

#[test]
fn portrait_output() {
    let out = stdout(&["element", "portrait", "a", "--depth", "2"]);
    assert!(out.contains("ε: (0 1)"));
    assert!(out.contains("0: ()"));
    assert!(out.contains("1: ()"));
}

#[test]
fn ggs_group_flag() {
    let out = stdout(&["--group", "ggs:3:1,-1", "element", "section", "b", "--vertex", "2"]);
    assert_eq!(out.trim(), "b");
    let out = stdout(&["--group", "ggs:3:1,-1", "element", "trivial", "b^3"]);
    assert_eq!(out.trim(), "true");
}

#[test]
fn group_round_trip_through_file() {
    let text = stdout(&["group"]);
    let path = temp_spec("grig.group", &text);
    let out = stdout(&[
        "--group",
        path.to_str().unwrap(),
        "element",
        "section",
        "c",
        "--vertex",
        "1",
    ]);
    assert_eq!(out.trim(), "d");
}

#[test]
fn subgroup_reports() {
    let wl = stdout(&["catalog", "export", "wl"]);
    let path = temp_spec("wl.sub", &wl);
    let spec = path.to_str().unwrap();
    let out = stdout(&["subgroup", "transitive", "--spec", spec, "--max-level", "8"]);
    assert_eq!(out.trim(), "transitive at levels 1..8");

    let b = stdout(&["catalog", "export", "b"]);
    let bpath = temp_spec("b.sub", &b);
    let out = stdout(&["subgroup", "index", "--spec", bpath.to_str().unwrap(), "--level", "4"]);
    assert_eq!(out.trim(), "8");

    let out = stdout(&["subgroup", "orbits", "--spec", spec, "--level", "3"]);
    assert!(out.starts_with("1 orbits at level 3"));
}

#[test]
fn classify_wp_via_spec_file() {
    let wp = stdout(&["catalog", "export", "wp"]);
    let path = temp_spec("wp.sub", &wp);
    let out = stdout(&[
        "--json",
        "subgroup",
        "classify",
        "--spec",
        path.to_str().unwrap(),
        "--max-level",
        "6",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "block-structure-side");
    let counts: Vec<u64> =
        v["orbit_counts"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(&counts[1..], &[2, 2, 2, 2, 2]);
}

#[test]
fn lattice_report() {
    let out = stdout(&["--json", "subgroup", "lattice-over-b"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["subgroup_count"], 10);
    assert_eq!(v["quotient_dihedral8"], true);
}

#[test]
fn exit_codes() {
    // Parse errors exit 2.
    let out = run(&["element", "trivial", "q x"]);
    assert_eq!(out.status.code(), Some(2));
    // Usage errors exit 2 (clap default).
    let out = run(&["element", "bogus-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
    // Resource refusals exit 3.
    let out = bin()
        .env("GRIGCALC_BUDGET", "2")
        .args(["subgroup", "lattice-over-b"])
        .output()
        .unwrap();
    // The lattice path enumerates 4096 elements; with the budget forced to
    // 2 the enumeration refuses.
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_filter_runs_and_passes() {
    let out = run(&["verify", "--only", "identities"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS identities:sections"));
    assert!(text.contains("all passed"));
}

#[test]
fn verify_json_schema() {
    let out = stdout(&["--json", "verify", "--only", "convention"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["all_passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 2);
}
