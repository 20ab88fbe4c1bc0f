use std::collections::HashSet;
use std::process::Command;

use sslevel3_cli::{list, run, select, Config, Status, UsageError};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sslevel3"))
}

#[test]
fn catalog_invariants() {
    let entries = list();
    assert!(entries.len() >= 15);
    let names: HashSet<_> = entries.iter().map(|(n, _)| *n).collect();
    assert_eq!(names.len(), entries.len());
    assert!(entries.iter().all(|(_, a)| !a.trim().is_empty()));
}

#[test]
fn named_checks() {
    let r = run(&["aut-order".into()], Config::default(), false).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].status, Status::Pass);
    assert_eq!(r.checks[0].details["order_f4"], 24);

    let r = run(&["tower-degrees".into()], Config::default(), false).unwrap();
    assert_eq!(r.checks[0].status, Status::Pass);
    assert_eq!(r.checks[0].details["from_counts"], serde_json::json!([6, 2, 4]));
}

#[test]
fn selection_keeps_catalog_order() {
    let names = ["height".to_string(), "aut-order".into(), "height".into()];
    let picked: Vec<_> = select(&names).unwrap().iter().map(|c| c.name).collect();
    assert_eq!(picked, ["aut-order", "height"]);
    assert!(matches!(
        select(&["nope".into()]),
        Err(UsageError::UnknownCheck(n)) if n == "nope"
    ));
}

#[test]
fn recorded_outcomes_do_not_fail() {
    let names = ["c2-v-proxies".to_string(), "aut-order".into()];
    let r = run(&names, Config::default(), true).unwrap();
    assert_eq!(r.checks[1].status, Status::RecordedOutcome);
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn exit_codes() {
    let ok = bin().args(["verify", "aut-order", "point-count"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("pass")).count(), 2);

    let unknown = bin().args(["verify", "no-such-check"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));

    let bad_flag = bin().args(["verify", "--parallel", "maybe"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));

    let bad_precision = bin()
        .args(["verify", "aut-order", "--padic-precision", "0"])
        .output()
        .unwrap();
    assert_eq!(bad_precision.status.code(), Some(2));
}

#[test]
fn json_shape() {
    let out = bin()
        .args(["verify", "point-count", "--format", "json", "--series-order", "7"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["version"].is_string());
    assert_eq!(v["config"], serde_json::json!({ "k": 3, "m": 6, "N": 7 }));
    let c = &v["checks"][0];
    assert_eq!(c["name"], "point-count");
    assert_eq!(c["status"], "pass");
    assert!(c["anchor"].is_string() && c["details"].is_object());
}

#[test]
fn list_command() {
    let out = bin().arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), list().len());
    let out = bin().args(["list", "--format", "json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), list().len());
}
