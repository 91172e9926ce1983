use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn brank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brank")).args(args).env_remove("BRANK_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn rank_two_tensor_certifies_at_two_and_violates_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    assert_eq!(code(&brank(&["gen", "--dims", "2,3,2,2", "--rank", "2", "--seed", "5", "-o", path(&t)])), 0);

    let ok = brank(&["certify", "--k", "2", "--quiet", path(&t)]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["verdict"], "certified_le_k");

    let bad = brank(&["certify", "--k", "1", "--quiet", path(&t)]);
    assert_eq!(code(&bad), 1);
    let r = stdout_json(&bad);
    assert_eq!(r["verdict"], "violated");
    assert_eq!(r["minor"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn contraction_method_passes_low_rank() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    brank(&["gen", "--dims", "2,2,2,2,2", "--rank", "3", "-o", path(&t)]);
    let out = brank(&["certify", "--k", "3", "--method", "contraction", "--trials", "2", "--quiet", path(&t)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"], "inconclusive_pass");
}

#[test]
fn float_field_certifies_with_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    brank(&["gen", "--dims", "3,3,3", "--rank", "1", "--field", "float64", "-o", path(&t)]);
    let out = brank(&["certify", "--k", "1", "--field", "float64", "--tol", "1e-9", "--quiet", path(&t)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["numerical"], true);
}

#[test]
fn orbit_witness_maps_first_word_onto_second() {
    let out = brank(&["orbit", "witness", "--wa", "0010212011", "--wb", "0020102012001011", "--quiet"]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["image"], "0020102012001011");
    assert_eq!(r["increasing"], true);

    let none = brank(&["orbit", "witness", "--wa", "12", "--wb", "21", "--quiet"]);
    assert_eq!(code(&none), 1);
    assert_eq!(stdout_json(&none)["exists"], false);
}

#[test]
fn orbit_act_applies_sigma() {
    let out = brank(&["orbit", "act", "--sigma", "[[1],[2,3]]", "--word", "12", "--quiet"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["image"], "122");
}

#[test]
fn completion_refills_extracted_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    let pivot = write(dir.path(), "pivot.json", r#"{"rows":["1"],"cols":["01"],"row_part":[1]}"#);
    brank(&["gen", "--dims", "2,2,2,2", "--rank", "1", "--seed", "1", "-o", path(&t)]);
    assert_eq!(code(&brank(&["complete", "extract", "--prefix", "2", "-o", path(&b), path(&t)])), 0);
    assert_eq!(code(&brank(&["complete", "validate", path(&b)])), 0);
    let fill = brank(&["complete", "fill", "--boundary", path(&b), "--pivot", path(&pivot), "-o", path(&c)]);
    assert_eq!(code(&fill), 0, "{}", String::from_utf8_lossy(&fill.stderr));
    let read = |p: &Path| serde_json::from_str::<Value>(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(read(&c), read(&t));
}

#[test]
fn conflicting_boundary_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(
        dir.path(),
        "b.json",
        r#"{"p":1,"n":2,"q":3,"values":[["0",1,2],["0",2,3],["1",1,2],["1",1,3],["01",1],["11",1],["001",1],["101",1]]}"#,
    );
    let out = brank(&["complete", "validate", "--quiet", path(&b)]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let kinds: Vec<_> = stdout_json(&out)["violations"].as_array().unwrap().iter().map(|v| v["kind"].clone()).collect();
    assert!(kinds.iter().any(|k| k == "conflict"), "{kinds:?}");
}

#[test]
fn completion_formula_text() {
    let dir = tempfile::tempdir().unwrap();
    let pivot = write(dir.path(), "pivot.json", r#"{"rows":["1","2"],"cols":["01","02"],"row_part":[1]}"#);
    let out = brank(&["complete", "formula", "--pivot", path(&pivot), "--prefix", "2", "--word", "0012", "--format", "text", "--quiet"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "x0012 = (x11*x021*x2002 - x12*x011*x2002 - x21*x021*x1002 + x22*x011*x1002) / (x11*x22 - x21*x12)\n"
    );
}

#[test]
fn phylo_simulated_tensor_passes_its_own_rank() {
    let dir = tempfile::tempdir().unwrap();
    let tree = write(dir.path(), "tree.nwk", "((a,b),(c,d));");
    let t = dir.path().join("m.json");
    assert_eq!(code(&brank(&["phylo", "simulate", "--tree", path(&tree), "--k", "2", "--stochastic", "-o", path(&t)])), 0);
    assert_eq!(code(&brank(&["phylo", "check", "--tree", path(&tree), "--k", "2", path(&t)])), 0);
    assert_eq!(code(&brank(&["phylo", "check", "--tree", path(&tree), "--k", "1", path(&t)])), 1);
}

#[test]
fn probe_reports_rank_one_quadrics() {
    let out = brank(&["probe", "--dims", "2,2,2", "--k", "1", "--degree", "2", "--quiet"]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["nullity"], 9);
    assert_eq!(r["agreed"], true);
}

#[test]
fn flatten_lists_all_bipartitions() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    brank(&["gen", "--dims", "2,2,2,2", "--rank", "3", "-o", path(&t)]);
    let r = stdout_json(&brank(&["flatten", "--quiet", path(&t)]));
    assert_eq!(r["flattenings"].as_array().unwrap().len(), 7);
    assert_eq!(r["lower_bound"], 3);
    let one = stdout_json(&brank(&["flatten", "--rows", "1,3", "--quiet", path(&t)]));
    assert_eq!(one["shape"], serde_json::json!([4, 4]));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    brank(&["gen", "--dims", "2,2,2,2,2,2", "--rank", "2", "--seed", "9", "-o", path(&t)]);
    let args = ["certify", "--k", "3", "--method", "contraction", "--trials", "2", "--seed", "4", "--quiet", path(&t)];
    let first = brank(&args);
    assert_eq!(first.stdout, brank(&args).stdout);
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_brank")).args(args).env("BRANK_THREADS", threads).output().unwrap();
        assert_eq!(out.stdout, first.stdout, "threads = {threads}");
    }
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    assert_eq!(code(&brank(&["certify", "--bogus"])), 64);
    assert_eq!(code(&brank(&["gen", "--dims", "2,2", "--rank", "1", "--threads", "0"])), 64);
    assert_eq!(code(&brank(&["probe", "--dims", "2,2", "--k", "1", "--degree", "2", "--modulus", "banana"])), 64);

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dims":[2,2],"data":[1,2,3]}"#);
    assert_eq!(code(&brank(&["certify", "--k", "1", path(&bad)])), 65);
    assert_eq!(code(&brank(&["certify", "--k", "1", "/nonexistent/t.json"])), 65);
    let tree = write(dir.path(), "tree.nwk", "((a,b);");
    assert_eq!(code(&brank(&["phylo", "simulate", "--tree", path(&tree), "--k", "2"])), 65);
}

#[test]
fn json_envelope_echoes_configuration() {
    let out = brank(&["orbit", "canonical", "--k", "2", "--n", "2", "--seed", "3"]);
    let v = stdout_json(&out);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["command"]["name"], "orbit");
    assert_eq!(v["result"]["rows"], serde_json::json!(["101", "011"]));
}
