use std::path::Path;
use std::process::{Command, Output};

use loplab::covering::{min_cover, CoverInstance, CoverUniverse};
use loplab::formulas::{least_number, least_number_refutation, lop};
use loplab::pe::{check_conditions, PeEngine};
use loplab::sa::{check_sa_proof, lp_degree_oracle};
use loplab::Limits;
use serde_json::Value;

fn loplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loplab"))
        .args(args)
        .env_remove("LOPLAB_ENUM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The library value as it reads back from pretty JSON, so floats compare alike.
fn via_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::from_str(&serde_json::to_string_pretty(v).unwrap()).unwrap()
}

#[test]
fn pe_of_m1_at_n5_is_one() {
    let o = loplab(&["pe", "--family", "lop", "--n", "5", "--axiom", "M1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn pe_of_product_is_printed_exactly() {
    let o = loplab(&["pe", "--family", "lop", "--n", "4", "--axiom", "M1", "--times", "x1,2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "-1/6\n");
}

#[test]
fn builtin_least_number_certificate_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("metrics.json");
    let o = loplab(&[
        "check-sa",
        "--family",
        "least-number",
        "--n",
        "8",
        "--cert",
        "builtin",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("OK: degree 1,"), "{}", stdout(&o));
    let lib = check_sa_proof(&least_number(8).unwrap(), &least_number_refutation(8).unwrap(), &Limits::default()).unwrap();
    assert_eq!(json(&out), via_json(&lib));
}

#[test]
fn broken_certificate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let mut proof = least_number_refutation(4).unwrap();
    proof.slack = loplab::algebra::ConicalJunta::unit();
    std::fs::write(&cert, serde_json::to_string(&proof).unwrap()).unwrap();
    let o = loplab(&["check-sa", "--family", "least-number", "--n", "4", "--cert", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn cover_ord_star_n4_d2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cover.json");
    let o = loplab(&["cover", "--n", "4", "--d", "2", "--universe", "ord-star", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("min=2\n"));
    let lib = min_cover(&CoverInstance::new(4, 2, CoverUniverse::OrdStar), &Limits::default()).unwrap();
    assert_eq!(json(&out), via_json(&lib));
}

#[test]
fn conditions_failure_exits_one_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cond.json");
    let o = loplab(&["check-conditions", "--family", "lop", "--n", "4", "--d", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let l = Limits::default();
    let lib = check_conditions(&lop(4).unwrap(), 2, &PeEngine::with_limits(4, l.clone()), &l).unwrap();
    assert_eq!(json(&out), via_json(&lib));
}

#[test]
fn find_sa_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lp.json");
    let o = loplab(&["find-sa", "--family", "lop", "--n", "3", "--d", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let lib = lp_degree_oracle(&lop(3).unwrap(), 1, &Limits::default()).unwrap();
    assert_eq!(json(&out), via_json(&lib));
}

#[test]
fn reduction_commands_succeed_on_least_number() {
    for cmd in ["check-reduction", "factorize"] {
        let o = loplab(&[cmd, "--q", "least-number:3", "--r", "least-number:2", "--seed", "7"]);
        assert!(o.status.success(), "{cmd}: {}", stdout(&o));
    }
    let o = loplab(&["transform-proof", "--q", "least-number:3", "--r", "least-number:2", "--proof", "builtin"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("OK"));
}

#[test]
fn report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = loplab(&["report", "--criteria", "2,7", "--seed", "5", "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    let v: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["seed"], 5);
    assert!(v["limits"]["max_order_n"].is_number());
    assert!(a.join("criterion_07.tsv").exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(loplab(&["bogus"]).status.code(), Some(2));
    assert_eq!(loplab(&["pe", "--family", "lop"]).status.code(), Some(2));
    assert_eq!(loplab(&["cover", "--n", "4", "--d", "2", "--universe", "term"]).status.code(), Some(2));
}

#[test]
fn enumeration_cap_is_read_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_loplab"))
        .args(["cover", "--n", "6", "--d", "2"])
        .env("LOPLAB_ENUM_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the configured cap"));
}
