//! End-to-end behaviour of the `bw` command line: exit codes, text output
//! and the JSON envelope.

use std::process::Command;

use birnbaum_cli::run;
use serde_json::Value;

fn bw(args: &[&str]) -> birnbaum_cli::Outcome {
    run(std::iter::once("bw").chain(args.iter().copied()))
}

#[test]
fn documented_examples() {
    let out = bw(&["relate", "A", "E:(1,1)", "E_u1:(1,1)"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout.trim(),
        "related: true (conditioning witness: statistic U, block {(1,1),(1,2)})"
    );

    let out = bw(&["closure", "ex1-universe", "--kinds", "A"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("1 class"));
    assert!(out.stdout.contains("{E:(1,1), E_u1:(1,1), E_v1:(1,1)}"));
    assert!(out.stdout.contains("direct edges: 2"));
    assert!(out.stdout.contains("relation not transitive; closure added 1 pair"));

    let out = bw(&["pvalue", "mixture", "--n", "12", "--k", "3", "--theta0", "1/2", "--successes", "9"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "433/8192 (0.05286)"));
}

#[test]
fn unrelated_pair_reports_false() {
    let out = bw(&["relate", "A", "E_u1:(1,1)", "E_v1:(1,1)"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "related: false"));
}

#[test]
fn exit_codes() {
    assert_eq!(bw(&["validate"]).code, 0);
    // usage: unknown subcommand, bad relation kind, missing argument
    assert_eq!(bw(&["frobnicate"]).code, 2);
    assert_eq!(bw(&["relate", "Q", "E:(1,1)", "E:(1,2)"]).code, 2);
    assert_eq!(bw(&["twopoint", "1/4"]).code, 2);
    // domain: unknown experiment, impossible conditioning, illegal θ
    let out = bw(&["suff-min", "nope"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("error["));
    assert_eq!(bw(&["coverage-ex3", "0", "given_X_positive"]).code, 1);
    assert_eq!(bw(&["twopoint", "1/2", "3"]).code, 1);
    assert_eq!(bw(&["pvalue", "binom", "--n", "12", "--theta0", "3/2", "--successes", "9"]).code, 1);
}

#[test]
fn json_envelope_is_stable() {
    let commands: &[&[&str]] = &[
        &["validate"],
        &["suff-min", "E"],
        &["ancillaries", "E"],
        &["condition", "E", "U", "(1,1)"],
        &["relate", "S", "E:(1,1)", "E:(1,2)"],
        &["closure", "ex1-universe"],
        &["verify-birnbaum", "ex1-universe"],
        &["--workspace", "@mayo", "chain", "E1:(9,3)", "E2:(9,3)"],
        &["pvalue", "negbinom", "--k", "3", "--theta0", "1/2", "--successes", "9"],
        &["audit-mayo"],
        &["coverage-ex3", "1/4", "unconditional"],
        &["twopoint", "0", "1"],
        &["np-mixture", "0.1", "0.05", "1", "1.1", "1", "0.05"],
        &["paper-report"],
    ];
    for args in commands {
        let mut full = vec!["--json"];
        full.extend_from_slice(args);
        let out = bw(&full);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        for key in ["command", "inputs", "values", "witnesses", "warnings"] {
            assert!(v.get(key).is_some(), "{args:?} lacks `{key}`");
        }
    }
}

#[test]
fn json_errors_carry_code() {
    let out = bw(&["--json", "coverage-ex3", "0", "given_X_positive"]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["code"], "CONDITION_IMPOSSIBLE");
}

#[test]
fn row_sum_error_names_the_line() {
    let dir = std::env::temp_dir().join(format!("bw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.bw");
    std::fs::write(
        &path,
        "# bad row\nexperiment E\n  outcomes a b c d\n  theta 1 : 1/6 1/6 2/6 3/6\n  theta 2 : 1/4 1/4 1/4 1/4\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bw"))
        .args(["--workspace", path.to_str().unwrap(), "validate"])
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("VALIDATION_ERROR"), "{stderr}");
    assert!(stderr.contains("ROW_SUM at line 4"), "{stderr}");
}

#[test]
fn ancillary_cap_from_environment() {
    // Example experiment has 4 outcomes; a cap of 3 refuses it.
    let out = bw(&["ancillaries", "E", "--cap", "3"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("TOO_LARGE"), "{}", out.stderr);
    let out = Command::new(env!("CARGO_BIN_EXE_bw"))
        .args(["ancillaries", "E"])
        .env("BW_ANCILLARY_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
