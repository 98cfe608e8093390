use std::process::{Command, Output};

use hqmf::fpoly::FFamily;
use hqmf::hlattice::HermLattice;
use hqmf::qfield::make_field;
use hqmf::torcoh::CohRing;
use hqmf::weilrep::cmat_from_json;
use serde_json::Value;

fn hqmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqmf")).args(args).output().expect("binary runs")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn documented_examples() {
    let o = hqmf(&["fspace", "dim", "-n", "3", "-g", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), r#"{"dim":9}"#);

    let o = hqmf(&["fspace", "sl2-check", "-n", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), r#"{"pass":true}"#);

    let o = hqmf(&[
        "modularity", "check", "--kind", "completed", "--poly", "h", "--d", "1", "--gram", "[[1]]", "--g", "1", "--generator", "w", "--tau", "i",
        "--tol", "1e-8",
    ]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["pass"], true);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["numeric"]["precision"], 128);
    assert!(v["tail_bound"].as_f64().is_some());
}

#[test]
fn failed_verification_exits_3_with_report() {
    let o = hqmf(&[
        "modularity", "check", "--kind", "completed", "--poly", "h", "--d", "1", "--gram", "[[1]]", "--generator", "w", "--holomorphic",
        "--trunc", "8",
    ]);
    assert_eq!(code(&o), 3);
    let v = json_of(&o);
    assert_eq!(v["pass"], false);
    assert!(v["residual"].as_f64().unwrap() > 1e-2);
    assert_eq!(v["T"], serde_json::json!([8, 1]));
}

#[test]
fn validation_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["--precision", "32", "field", "info", "--d", "1"],
        &["lattice", "disc", "--d", "1", "--gram", "[[1"],
        &["fspace", "dim", "-n", "2", "-g", "1", "--frobnicate"],
        &["field", "info", "--d", "4"],
        &["boundary", "analyze", "--d", "5", "--hyperbolic", "[1]"],
        &["fspace", "dim", "-n", "2", "-g", "3"],
        &["modularity", "check", "--kind", "weighted", "--d", "1", "--gram", "[[1]]", "--generator", "m"],
        &["lattice", "enum", "--d", "1", "--gram", "[[1]]", "--coset", "9"],
    ];
    for args in cases {
        let o = hqmf(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn outputs_are_deterministic() {
    let args = ["qexp", "--kind", "cycles", "--d", "1", "--gram", "[[1,0],[0,1]]", "--g", "1", "--trunc", "3"];
    let a = hqmf(&args);
    let b = hqmf(&args);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    let c = hqmf(&with_workers);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v = json_of(&a);
    assert_eq!(v["meta"]["kind"], "cycles");
    assert!(!v["coefficients"].as_array().unwrap().is_empty());
}

#[test]
fn json_round_trips() {
    let o = hqmf(&["lattice", "disc", "--d", "3", "--gram", "[[1,0],[0,2]]"]);
    let v = json_of(&o);
    let l = HermLattice::from_json(&v["lattice"]).unwrap();
    assert_eq!(l.to_json(), v["lattice"]);
    // |L^∨/L| = N(δ)·N(2δ) = 3·12
    assert_eq!(v["disc"]["order"], 36);

    let o = hqmf(&["weilrep", "matrix", "--d", "1", "--gram", "[[1]]", "--generator", "n", "--matrix", "[[1]]"]);
    let m = cmat_from_json(&json_of(&o)).unwrap();
    assert_eq!(m.len(), 4);

    let o = hqmf(&["cycles", "class", "--d", "1", "--diag", "[1,1]", "--tuple", "[[1, {\"a\":0,\"b\":1}]]"]);
    let v = json_of(&o);
    let ring = CohRing::new(make_field(1).unwrap(), vec![1, 1]).unwrap();
    let c = ring.class_from_json(&v["class"]).unwrap();
    assert_eq!(ring.class_to_json(&c), v["class"]);
    assert!(!c.is_zero());

    let o = hqmf(&["fspace", "project", "-n", "2", "--poly", "h", "-k", "2"]);
    let v = json_of(&o);
    let fam = FFamily::identity(make_field(1).unwrap(), 2).unwrap();
    let p = fam.poly_from_json(&v["projection"]).unwrap();
    assert_eq!(fam.poly_to_json(&p), v["projection"]);
    // h is Λ(1): its π_2 component is h itself
    assert_eq!(p, fam.h_poly());
}

#[test]
fn cohomology_and_decomposition() {
    let v = json_of(&hqmf(&["cohomology", "basis", "--d", "1", "--diag", "[1,1]", "-l", "1"]));
    assert_eq!(v["basis"].as_array().unwrap().len(), 4);
    let v = json_of(&hqmf(&["cohomology", "basis", "--d", "1", "--diag", "[1,1]", "-l", "1", "--primitive"]));
    assert_eq!(v["basis"].as_array().unwrap().len(), 3);
    let o = hqmf(&["cycles", "decompose", "--d", "3", "--diag", "[1,2]", "-g", "1"]);
    assert_eq!(code(&o), 0);
    assert!(json_of(&o).is_object());
}

#[test]
fn boundary_commands() {
    let o = hqmf(&["boundary", "analyze", "--d", "1", "--hyperbolic", "[1,1]", "--e", "[1,0,0,0]"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["r_J"], serde_json::json!([4, 1]));
    let o = hqmf(&[
        "boundary", "correct", "--d", "1", "--hyperbolic", "[1,1]", "--e", "[1,0,0,0]", "-g", "1", "--nu", "[0]", "--target", "[[2]]",
    ]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["g"], 1);
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("hqmf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dim.json");
    let o = hqmf(&["fspace", "dim", "-n", "4", "-g", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), r#"{"dim":36}"#);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tau_matrix_input() {
    let o = hqmf(&[
        "modularity", "check", "--kind", "weighted", "--poly", "1", "--d", "3", "--gram", "[[1]]", "--generator", "n", "--matrix", "[[1]]", "--tau",
        "[[[0.1, 0.9]]]",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json_of(&o)["weight"], 1);
}
