use std::process::{Command, Output};

use serde_json::Value;

fn cyclopq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclopq")).args(args).env_remove("CYCLOPQ_FORMAT").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn field_invariants() {
    let out = cyclopq(&["field", "--ell", "29"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["D"], 29);
    assert_eq!(v["h"], 1);
    assert_eq!(v["epsilon"]["display"], "(5+√29)/2");

    let v = json_of(&cyclopq(&["field", "--ell", "19"]));
    assert_eq!(v["D"], -19);
    assert_eq!(v["imaginary"], true);
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(cyclopq(&["field", "--ell", "4"]).status.code(), Some(2));
    assert_eq!(cyclopq(&["certify", "--ell", "13"]).status.code(), Some(2));
    assert_eq!(cyclopq(&["factor", "2^^3"]).status.code(), Some(2));
    assert_eq!(cyclopq(&["--precision-bits", "64", "field", "--ell", "17"]).status.code(), Some(2));
    assert_eq!(cyclopq(&["search", "--ell", "23", "--x-min", "9", "--x-max", "3"]).status.code(), Some(2));
}

#[test]
fn search_small_range() {
    let v = json_of(&cyclopq(&["search", "--ell", "23", "--x-max", "12"]));
    let xs: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["x"].as_str().unwrap()).collect();
    assert_eq!(xs, ["2", "3", "5"]);
    assert_eq!(v["records"][0]["p"], "47");
    assert_eq!(v["records"][0]["q"], "178481");

    let v = json_of(&cyclopq(&["search", "--ell", "23", "--x-min", "6", "--x-max", "9"]));
    assert_eq!(v["count"], 0);
}

#[test]
fn search_filter_by_pair() {
    let v = json_of(&cyclopq(&["search", "--ell", "23", "--x-max", "12", "--p", "47", "--q", "178481"]));
    assert_eq!(v["count"], 1);
}

#[test]
fn certify_single_prime() {
    let out = cyclopq(&["certify", "--ell", "47"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verdict"], "certified_at_most_four");
    assert!(v["branches"].as_array().unwrap().iter().all(|b| b["holds"] == true));
}

#[test]
fn certify_range_is_inclusive() {
    let v = json_of(&cyclopq(&["certify", "--range", "43..53"]));
    assert_eq!(v["total"], 3);
    assert_eq!(v["certified"], 3);
}

#[test]
fn factor_expressions() {
    let v = json_of(&cyclopq(&["factor", "2^43-1"]));
    let primes: Vec<&str> = v["factors"].as_array().unwrap().iter().map(|f| f["prime"].as_str().unwrap()).collect();
    assert_eq!(primes, ["431", "9719", "2099863"]);
    assert_eq!(v["complete"], true);

    let v = json_of(&cyclopq(&["factor", "phi(23, 10)"]));
    assert_eq!(v["factors"].as_array().unwrap().len(), 1);
    assert_eq!(v["n"], "11111111111111111111111");

    let v = json_of(&cyclopq(&["factor", "12"]));
    assert_eq!(v["pretty"], "2^2 * 3");
}

#[test]
fn factor_budget_exits_3() {
    let out = cyclopq(&["--budget", "1", "--trial-bound", "10", "factor", "2^101-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["complete"], false);
}

#[test]
fn json_output_is_canonical() {
    let out = cyclopq(&["bound", "--ell", "23", "--p", "47", "--q", "178481"]);
    let v = json_of(&out);
    assert_eq!(cyclopq::json::to_canonical_string(&v).as_bytes(), &out.stdout[..]);
    assert_eq!(v["case"], "i");
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclopq")).args(["factor", "12"]).env("CYCLOPQ_FORMAT", "tsv").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("prime\texponent\n2\t2\n3\t1\n"));
}

#[test]
fn tsv_certify_rows() {
    let out = cyclopq(&["--format", "tsv", "certify", "--ell", "53"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split('\t').count(), 7);
    assert!(lines.all(|l| l.split('\t').nth(3) == Some("true")));
}

#[test]
fn opn_bounds() {
    let v = json_of(&cyclopq(&["opn", "--beta", "2"]));
    assert_eq!(v["k_max"], 23);
    assert_eq!(v["N_bound"], "2^(4^24)");
}

#[test]
fn cache_file_is_reused() {
    let dir = std::env::temp_dir().join(format!("cyclopq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("factors.cache");
    let p = path.to_str().unwrap();
    let a = cyclopq(&["--cache", p, "factor", "2^59-1"]);
    assert!(path.exists());
    let b = cyclopq(&["--cache", p, "factor", "2^59-1"]);
    assert_eq!(json_of(&a)["factors"], json_of(&b)["factors"]);
    std::fs::remove_dir_all(&dir).unwrap();
}
