use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wittlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wittlat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn lattice_check_exit_codes() {
    let out = wittlat(&["lattice-check"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], Value::Bool(true));

    let dir = tempfile::tempdir().unwrap();
    let collinear = write(dir.path(), "c.json", r#"{"rank":2,"images":[[1,0],[2,0]]}"#);
    let out = wittlat(&["--embedding", &collinear, "lattice-check"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], Value::Bool(false));

    let bad = write(dir.path(), "b.json", "{not json");
    assert_eq!(wittlat(&["--embedding", &bad, "lattice-check"]).status.code(), Some(2));
    let missing = write(dir.path(), "m.json", r#"{"rank":2,"images":[[1,0]]}"#);
    assert_eq!(wittlat(&["--embedding", &missing, "lattice-check"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wittlat(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(wittlat(&["verify"]).status.code(), Some(2));
    assert_eq!(wittlat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(wittlat(&["cover", "--module", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn verify_pass_and_fail() {
    let out = wittlat(&["verify", "--suite", "jacobi", "--trials", "10", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite"], "jacobi");
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);

    // order 4 is one short of annihilating ℳ² components
    let out = wittlat(&["verify", "--suite", "omega-annihilate", "--order", "4", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let first = &v["failures"][0];
    assert!(first["location"].as_str().unwrap().contains("Ω^(4)"));
    assert!(!first["residual"].as_str().unwrap().is_empty());
}

#[test]
fn bf_identity_forms() {
    let args = ["verify", "--suite", "bf-identity", "--trials", "12", "--seed", "7"];
    let out = wittlat(&[&args[..], &["--form", "corrected"]].concat());
    assert_eq!(out.status.code(), Some(0));
    // the printed coefficient fails on non-collapsing tuples
    let out = wittlat(&args);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical_and_out_file_matches_stdout() {
    let args = ["verify", "--suite", "structural-maps", "--trials", "6", "--seed", "11"];
    let a = wittlat(&args);
    let b = wittlat(&args);
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let c = wittlat(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(c.status.code(), a.status.code());
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn classify_modules() {
    let dir = tempfile::tempdir().unwrap();
    let m2 = write(dir.path(), "m2.json", r#"{"kind":"mn","n":2,"beta":["1/3","i"]}"#);
    let out = wittlat(&["classify", "--module", &m2]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["classification"];
    assert_eq!(c["n"], 2);
    assert_eq!(c["convention_offset"], 1);

    let s = write(dir.path(), "s.json", r#"{"kind":"sgamma","beta":["1/3","i"]}"#);
    let out = wittlat(&["classify", "--module", &s]);
    assert_eq!(out.status.code(), Some(0));
    let flags = json(&out)["classification"]["condition_flags"].to_string();
    assert!(flags.contains("sgamma"));

    let bad = write(dir.path(), "x.json", r#"{"kind":"mn","beta":["0","0"]}"#);
    assert_eq!(wittlat(&["classify", "--module", &bad]).status.code(), Some(2));
}

#[test]
fn cover_audit() {
    let dir = tempfile::tempdir().unwrap();
    let m1 = write(dir.path(), "m1.json", r#"{"kind":"mn","n":1,"beta":["1/3","i"]}"#);
    let out = wittlat(&["cover", "--module", &m1, "--gamma", "0,-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let row = &v["audit"]["rows"][0];
    assert_eq!(row["gamma"], serde_json::json!([0, -1]));
    assert!(row["rank"].as_u64().unwrap() <= row["bound"].as_u64().unwrap());
    assert_eq!(v["reduction"]["zero"], true);

    let t = write(dir.path(), "t.json", r#"{"kind":"trivial"}"#);
    let out = wittlat(&["cover", "--module", &t]);
    assert_eq!(json(&out)["audit"]["rows"][0]["rank"], 0);

    assert_eq!(wittlat(&["cover", "--module", &m1, "--gamma", "1"]).status.code(), Some(2));
}
