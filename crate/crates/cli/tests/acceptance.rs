//! Acceptance criteria 1-11, one line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are computed like the rest and print
//! FAIL; the test only breaks if one of them starts passing (so the list can
//! be retired) or if any other criterion fails.

use std::process::Command;
use std::time::Instant;

use sslevel3_cli::{run, CheckDescriptor, Config, Report, Status};

/// Criterion 8: the twist u -> -u, u a1 -> u a1 sends a1 to -a1, and no
/// star-isomorphism lifting [-1] reaches it. Exhaustive search over
/// W_2(F4)[a1]/(a1^2) already fails in degree 8, and any lift at (3, 6, 9)
/// would project to one there.
const KNOWN_FAILURES: &[u32] = &[8];

struct Line {
    id: u32,
    ok: bool,
    what: String,
}

fn check<'a>(report: &'a Report, name: &str) -> &'a CheckDescriptor {
    report
        .get(name)
        .unwrap_or_else(|| panic!("{name} missing from report"))
}

fn passes(report: &Report, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = check(report, n);
        ok &= c.status == Status::Pass;
        parts.push(format!(
            "{n}: {}",
            c.details["summary"].as_str().unwrap_or("")
        ));
    }
    (ok, parts.join("; "))
}

fn report_bytes() -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_sslevel3"))
        .args(["report", "--format", "json"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1), "criterion 8 fails the run");
    out.stdout
}

fn main() {
    let start = Instant::now();
    let report = run(&[], Config::default(), true).expect("default config is valid");
    let d = |name: &str| &check(&report, name).details;
    let mut lines = Vec::new();
    let mut push = |id: u32, ok: bool, what: String| lines.push(Line { id, ok, what });

    let (ok, what) = passes(&report, &["aut-order", "aut-structure"]);
    let ok = ok && d("aut-order")["order_f4"] == 24 && !d("aut-structure")["hurwitz_iso"].is_null();
    push(1, ok, what);

    let (ok, what) = passes(&report, &["point-count", "three-torsion", "order-three-point"]);
    let ok = ok && d("point-count")["count"] == 9 && d("order-three-point")["order"] == 3;
    push(2, ok, what);

    let (ok, what) = passes(&report, &["point-stabilizers", "subgroup-stabilizers"]);
    push(3, ok, what);

    let (ok, what) = passes(&report, &["modular-groups", "tower-degrees"]);
    let ok = ok
        && d("tower-degrees")["from_counts"] == serde_json::json!([6, 2, 4])
        && d("tower-degrees")["full_level_count"] == 48
        && d("modular-groups")["indices"] == serde_json::json!([4, 2]);
    push(4, ok, what);

    let (ok, what) = passes(&report, &["height"]);
    push(5, ok, what);

    let (ok, what) = passes(&report, &["fgl-axioms"]);
    let ok = ok && d("fgl-axioms")["laws"].as_u64() >= Some(22);
    push(6, ok, what);

    let (ok, what) = passes(&report, &["c3-action"]);
    push(7, ok, what);

    let (ok, what) = passes(&report, &["c2-action"]);
    push(8, ok, what);

    let (ok, what) = passes(&report, &["serre-tate"]);
    push(9, ok, what);

    let (ok, what) = passes(&report, &["lubin-tate-injectivity"]);
    push(10, ok, what);

    let (a, b) = (report_bytes(), report_bytes());
    let sequential = run(&[], Config::default(), false).unwrap();
    let identical = a == b && sequential.to_json() == report.to_json();
    let in_process = String::from_utf8(a).unwrap().trim_end() == report.to_json();
    let (stable, what) = passes(&report, &["precision-stability"]);
    push(
        11,
        identical && in_process && stable,
        format!("reports byte-identical: {identical}, binary matches library: {in_process}; {what}"),
    );

    let mut unexpected = Vec::new();
    for l in &lines {
        let known = KNOWN_FAILURES.contains(&l.id);
        println!(
            "criterion {:>2}: {}{}  {}",
            l.id,
            if l.ok { "PASS" } else { "FAIL" },
            if known && !l.ok { " (known)" } else { "" },
            l.what
        );
        if l.ok == known {
            unexpected.push(l.id);
        }
    }
    println!("elapsed {:.1?}", start.elapsed());
    assert!(
        unexpected.is_empty(),
        "criteria with unexpected outcomes: {unexpected:?}"
    );
}
