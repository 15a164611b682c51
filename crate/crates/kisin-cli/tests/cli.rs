//! End-to-end checks of the `kisin` binary: exit codes, report schema, and
//! the documented example invocations.

use std::process::{Command, Output};

fn kisin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kisin"))
        .args(args)
        .output()
        .expect("spawn kisin binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn json_report(out: &Output) -> serde_json::Value {
    let value: serde_json::Value = serde_json::from_str(&stdout(out)).expect("JSON stdout");
    assert_eq!(value["schema"], "kisin.report/1");
    value
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(kisin(&["--help"]).status.code(), Some(0));
    assert_eq!(kisin(&["--version"]).status.code(), Some(0));
    assert_eq!(kisin(&["lines", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    // Unknown subcommand, missing required flag, unknown preset, bad corank.
    assert_eq!(kisin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kisin(&["lines", "--p", "5"]).status.code(), Some(1));
    assert_eq!(
        kisin(&["lines", "--preset", "h9-bogus", "--p", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kisin(&["lines", "--preset", "h2-level2", "--p", "5", "--corank", "2"])
            .status
            .code(),
        Some(1)
    );
    // verify-appendix covers only p = 2 and p = 5.
    assert_eq!(kisin(&["verify-appendix", "--p", "3"]).status.code(), Some(1));
}

#[test]
fn precision_exhaustion_exits_three() {
    let out = kisin(&["verify-appendix", "--p", "2", "--precision", "40"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_appendix_p2_passes() {
    let out = kisin(&["verify-appendix", "--p", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    assert_eq!(report["outputs"]["ok"], true);
    let checks = report["outputs"]["checks"].as_array().expect("checks");
    assert_eq!(checks.len(), 3);
    assert_eq!(checks[0]["corank"], 3);
    assert_eq!(checks[0]["computed"], serde_json::json!([16, 24]));
    assert_eq!(checks[2]["computed"], serde_json::json!([48, 56]));
}

#[test]
fn lines_quadratic_level2_at_five() {
    let out = kisin(&["lines", "--preset", "h2-level2", "--p", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    let coranks = report["outputs"]["coranks"].as_array().expect("coranks");
    assert_eq!(coranks.len(), 1);
    assert_eq!(coranks[0]["mu"], serde_json::json!([20, 36]));
    // Hodge exponents are det-valuation complements: 40 - mu.
    let lines = coranks[0]["lines"].as_array().expect("lines");
    assert_eq!(lines[0]["hodge_exponent"], 20);
    assert_eq!(lines[1]["hodge_exponent"], 4);
    // The report embeds the module presentation itself.
    assert_eq!(report["outputs"]["module"]["p"], 5);
    assert_eq!(report["outputs"]["module"]["e"], 40);
}

#[test]
fn hn_quartic_cyclic_at_two() {
    let out = kisin(&["hn", "--preset", "h4-cyclic", "--p", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    let outputs = &report["outputs"];
    assert_eq!(outputs["slope"]["num"], "1");
    assert_eq!(outputs["slope"]["den"], "2");
    assert_eq!(outputs["semistable"], true);
    assert_eq!(outputs["certificate"], serde_json::Value::Null);
    let polygon = outputs["polygon"].as_array().expect("polygon");
    assert_eq!(polygon.first().expect("start")[0], 0);
    assert_eq!(polygon.last().expect("end")[0], 4);
    assert_eq!(polygon.last().expect("end")[1]["num"], "2");
}

#[test]
fn nine_case_table_matches_documented_values() {
    let out = kisin(&["table-nine-cases", "--p", "5", "--n", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    let cases = report["outputs"]["cases"].as_array().expect("cases");
    assert_eq!(cases.len(), 9);
    let coeff = |i: usize| -> (String, String) {
        (
            cases[i]["delta"]["coefficient"]["num"]
                .as_str()
                .expect("num")
                .to_string(),
            cases[i]["delta"]["coefficient"]["den"]
                .as_str()
                .expect("den")
                .to_string(),
        )
    };
    assert_eq!(coeff(0), ("1".into(), "2".into()));
    assert_eq!(coeff(3), ("1".into(), "3".into()));
    // At p = 5 all nine cases are defined; case 9 carries a range qualifier.
    assert!(cases[8]["delta"]["qualifier"]["range"].is_object());

    // At p = 7 case 9 is unavailable but the table still succeeds.
    let out7 = kisin(&["table-nine-cases", "--p", "7", "--n", "1", "--json"]);
    assert_eq!(out7.status.code(), Some(0));
    let report7 = json_report(&out7);
    let cases7 = report7["outputs"]["cases"].as_array().expect("cases");
    assert!(cases7[8]["unavailable"].is_string());

    // CSV mode emits a header plus nine rows.
    let csv = kisin(&["table-nine-cases", "--p", "7", "--n", "1", "--csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = stdout(&csv);
    let rows: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "case,coefficient_num,coefficient_den,qualifier,max_num,max_den");
    assert_eq!(rows[9], "9,,,unavailable,,");
}

#[test]
fn elliptic_delta_splits_composite_degree() {
    let out = kisin(&["delta-elliptic", "--disc", "-7", "--n", "4", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    assert_eq!(
        report["outputs"]["factorization"],
        serde_json::json!([{ "p": 2, "r": 2 }])
    );
    let deltas = report["outputs"]["deltas"].as_array().expect("deltas");
    assert_eq!(deltas.len(), 1);
    // chi(-7 at 2) = 1, so the coefficient is r/2 = 1.
    assert_eq!(deltas[0]["coefficient"]["num"], "1");
    assert_eq!(deltas[0]["coefficient"]["den"], "1");

    // Non-fundamental shapes are rejected with a usage exit.
    assert_eq!(
        kisin(&["delta-elliptic", "--disc", "-5", "--n", "2"]).status.code(),
        Some(1)
    );
}

#[test]
fn weights_report_cm_type() {
    let out = kisin(&[
        "weights", "--p", "2", "--h", "4", "--phi", "1,2", "--lambda", "2,0,0,0", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    let outputs = &report["outputs"];
    assert_eq!(
        outputs["weights"],
        serde_json::json!(["12", "9", "3", "6"])
    );
    assert_eq!(outputs["p_torsion"].as_array().expect("torsion").len(), 3);
    assert_eq!(outputs["coefficient"]["num"], "3");
    assert_eq!(outputs["coefficient"]["den"], "10");
}

#[test]
fn reports_are_deterministic() {
    let first = kisin(&["lines", "--preset", "h2-level2", "--p", "3", "--json"]);
    let second = kisin(&["lines", "--preset", "h2-level2", "--p", "3", "--json"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}
