use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use moduli_core::exact::rat;
use moduli_core::vertex::HomologyClass;
use moduli_core::{Mono, SuperPoly, Var};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_moduli-count"));
    c.env_remove("MODULI_COUNT_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn moduli-count")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

fn s(j: u16, k: u8, l: i32) -> SuperPoly {
    SuperPoly::var(Var::sheaf(j, k, l))
}

#[test]
fn elliptic_rank_two_class() {
    let v = json(&run(&["invariant", "--genus", "1", "--rank", "2", "--degree", "1"]));
    let c = HomologyClass::from_json(&v).unwrap();
    assert_eq!(c.rep, s(1, 2, 2).scale(&rat(-1, 2)) + s(1, 1, 1).mul(&s(2, 1, 1)));
    assert_eq!(v["kclass"], serde_json::json!([2, 1]));
    assert_eq!(v["gauge"], "xi");
    assert_eq!(HomologyClass::from_json(&c.to_json()).unwrap(), c);
}

#[test]
fn even_part_in_genus_two() {
    let v = json(&run(&["invariant", "--genus", "2", "--rank", "2", "--degree", "1", "--even-only"]));
    let c = HomologyClass::from_json(&v).unwrap();
    assert_eq!(c.rep.len(), 5);
    assert_eq!(c.rep.coeff(&Mono(vec![(Var::sheaf(1, 2, 2), 5)])), rat(-1, 48));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["invariant", "--genus", "1", "--rank", "0", "--degree", "0"]).status.code(), Some(1));
    assert_eq!(run(&["invariant", "--genus", "1"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["pairing", "--genus", "1", "--rank", "2", "--degree", "1", "--monomial", "Q"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn pairing_outputs() {
    let v = json(&run(&["pairing", "--genus", "2", "--rank", "2", "--degree", "1", "--monomial", "S_{1,2,2}^5"]));
    assert_eq!(v, serde_json::json!({"value": "-5/2"}));
    let v = json(&run(&["pairing", "--genus", "1", "--rank", "2", "--degree", "1", "--alpha"]));
    assert_eq!(v, serde_json::json!({"alpha_poly": [["1", "-1/2"]]}));
    let v = json(&run(&["pairing", "--genus", "2", "--rank", "2", "--degree", "1", "--monomial", "S_{1,2,2}^4"]));
    assert_eq!(v, serde_json::json!({"value": "0"}));
}

#[test]
fn volumes_with_cross_check() {
    let o = run(&["volume", "--genus", "2", "--rank", "2", "--degree", "0..1", "--method", "jk"]);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["value"], "1/6");
    assert_eq!(rows[1]["value"], "1/12");
    assert_eq!(rows[1]["jk"], "1/12");
    let csv = stdout(&run(&["volume", "--genus", "2", "--rank", "2", "--degree", "1", "--output", "csv"]));
    assert_eq!(csv, "genus,rank,degree,value\n2,2,1,\"1/12\"\n");
}

#[test]
fn table_order_is_deterministic() {
    let args = ["table", "--genus", "0..2", "--rank", "1..2", "--degree", "0,1", "--output", "csv"];
    let one = stdout(&run(&[&args[..], &["--jobs", "1"]].concat()));
    let many = stdout(&run(&[&args[..], &["--jobs", "4"]].concat()));
    assert_eq!(one, many);
    let keys: Vec<&str> = one.lines().skip(1).map(|l| l.rsplit_once(",\"").unwrap().0).collect();
    let mut sorted = keys.clone();
    sorted.sort_by_key(|k| k.split(',').map(|x| x.parse::<i64>().unwrap()).collect::<Vec<_>>());
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 12);
}

fn cache_files(dir: &Path) -> Vec<std::path::PathBuf> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect()
}

#[test]
fn cache_is_transparent_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["invariant", "--genus", "2", "--rank", "2", "--degree", "1"];
    let plain = stdout(&run(&args));
    let first = bin().args(args).env("MODULI_COUNT_CACHE", dir.path()).output().unwrap();
    assert_eq!(stdout(&first), plain);
    let files = cache_files(dir.path());
    assert_eq!(files.len(), 1);
    let entry: Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert!(entry["key"].as_str().unwrap().starts_with(&format!("engine={}", moduli_core::ENGINE_VERSION)));

    // a tampered payload with a stale checksum is ignored and rewritten
    let mut tampered = entry.clone();
    tampered["payload"]["poly"] = serde_json::json!({"terms": []});
    fs::write(&files[0], tampered.to_string()).unwrap();
    let again = run(&[&args[..], &["--cache-dir", dir.path().to_str().unwrap()]].concat());
    assert_eq!(stdout(&again), plain);
    let repaired: Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(repaired, entry);

    // garbage is also a miss
    fs::write(&files[0], "not json").unwrap();
    let third = run(&[&args[..], &["--cache-dir", dir.path().to_str().unwrap()]].concat());
    assert_eq!(stdout(&third), plain);
}

#[test]
fn text_and_latex_outputs() {
    let t = stdout(&run(&["invariant", "--genus", "1", "--rank", "1", "--degree", "3", "--output", "text"]));
    assert!(t.contains("s_{1,2,2}"));
    let l = stdout(&run(&["invariant", "--genus", "1", "--rank", "2", "--degree", "1", "--output", "latex"]));
    assert!(l.contains("s_{1,2,2}"));
}

#[test]
fn genus_zero_is_flagged() {
    let v = json(&run(&["invariant", "--genus", "0", "--rank", "2", "--degree", "1"]));
    assert_eq!(v["meta"]["extrapolated"], true);
}

#[test]
fn quick_selftest_passes() {
    let o = run(&["selftest", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAILED"));
}
