use std::f64::consts::{E, PI};
use std::io::Write;

use maglab_cli::{run, run_with_env, Outcome, EXIT_DOMAIN, EXIT_OK, EXIT_PARSE};
use serde_json::Value;

fn maglab(args: &[&str]) -> Outcome {
    run(std::iter::once("maglab").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("stdout is JSON")
}

fn error_name(out: &Outcome) -> String {
    let last = out.stderr.lines().last().expect("error payload");
    let payload: Value = serde_json::from_str(last).expect("error payload is JSON");
    assert!(payload["message"].is_string());
    payload["error"].as_str().unwrap().to_string()
}

fn finite_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn two_point_inverse_power_is_e() {
    let doc = json(&maglab(&["mag", "--space", "twopoint", "--R", "1", "--nu", "-1"]));
    let value = &doc["rows"][0]["value"];
    assert!((value["re"].as_f64().unwrap() - E).abs() < 1e-13, "{doc}");
    assert_eq!(value["im"].as_f64().unwrap(), 0.0);
}

#[test]
fn gtable_second_row() {
    let doc = json(&maglab(&["gtable", "--max-j", "2"]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["polynomial"], "nu(nu-1)/2*t1^2 + nu*t2");
    assert_eq!(rows[0]["polynomial"], "1");
}

#[test]
fn padic_poles_on_the_lattice() {
    let doc = json(&maglab(&["beta", "--space", "padic:p=2", "--poles", "--rect", "-1.5,-0.5,-30,30"]));
    let entries = doc["poles"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 7, "{doc}");
    let spacing = 2.0 * PI / 2f64.ln();
    for e in entries {
        let (re, im) = (e["location"]["re"].as_f64().unwrap(), e["location"]["im"].as_f64().unwrap());
        assert!((re + 1.0).abs() < 1e-8);
        assert!((im / spacing - (im / spacing).round()).abs() < 1e-8);
    }
}

#[test]
fn convert_round_trip_is_exact() {
    let coeffs = "3/2,-1/3,5/7,0,2";
    let there = json(&maglab(&[
        "convert", "--gamma", "-3/2", "--coeffs", coeffs, "--from-nu", "-1", "--to-nu", "1",
    ]));
    assert_eq!(there["gamma"], "3/2");
    let mid: Vec<&str> = there["coeffs"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let back = json(&maglab(&[
        "convert", "--gamma", "3/2", "--coeffs", &mid.join(","), "--from-nu", "1", "--to-nu", "-1",
    ]));
    assert_eq!(back["gamma"], "-3/2");
    let round: Vec<&str> = back["coeffs"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(round.join(","), coeffs);
}

#[test]
fn output_is_deterministic() {
    let args = ["beta", "--space", "sphere:n=2", "--z", "-0.5,-2.5+1i,0.75-0.2i"];
    let a = maglab(&args);
    let b = maglab(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = maglab(&["mag", "--space", "twopoint", "--R", "1", "--nu", "-1"]);
    assert!(out.stdout.contains("2.7182818284590451e0"), "{}", out.stdout);
}

#[test]
fn csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = maglab(&[
        "mag", "--space", "sphere:n=1", "--R", "1:2:3", "--nu", "1,2", "--format", "csv", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "R,nu_re,nu_im,value_re,value_im");
    assert_eq!(lines.len(), 1 + 3 * 2);
}

#[test]
fn finite_file_two_points() {
    let f = finite_file(r#"{"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]}"#);
    let doc = json(&maglab(&["mag", "--file", f.path().to_str().unwrap(), "--R", "1", "--nu", "-1"]));
    let want = 2.0 / (1.0 + (-1f64).exp());
    assert!((doc["rows"][0]["value"]["re"].as_f64().unwrap() - want).abs() < 1e-13, "{doc}");
}

#[test]
fn finite_file_missing_dist() {
    let f = finite_file(r#"{"labels": ["a", "b"]}"#);
    let out = maglab(&["mag", "--file", f.path().to_str().unwrap(), "--R", "1"]);
    assert_eq!(out.code, EXIT_DOMAIN);
    assert_eq!(error_name(&out), "SchemaError");
}

#[test]
fn finite_file_asymmetric() {
    let f = finite_file(r#"{"labels": ["a", "b"], "dist": [[0, 1], [1.5, 0]]}"#);
    let path = f.path().to_str().unwrap();
    let lax = maglab(&["mag", "--file", path, "--R", "1"]);
    assert_eq!(lax.code, EXIT_OK);
    assert!(lax.stderr.starts_with("warning: asymmetric"), "{}", lax.stderr);
    let strict = maglab(&["--strict", "mag", "--file", path, "--R", "1"]);
    assert_eq!(strict.code, EXIT_DOMAIN);
    assert_eq!(error_name(&strict), "MetricViolation");
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        vec!["mag", "--R", "1"],
        vec!["mag", "--space", "cube", "--R", "1"],
        vec!["mag", "--space", "twopoint", "--R", "1,,2"],
        vec!["beta", "--space", "twopoint", "--z", "1+"],
        vec!["convert", "--gamma", "x", "--coeffs", "1", "--from-nu", "1", "--to-nu", "2"],
        vec!["frobnicate"],
    ] {
        let out = maglab(&args);
        assert_eq!(out.code, EXIT_PARSE, "{args:?}: {}", out.stderr);
        assert_eq!(error_name(&out), "ParseError");
    }
}

#[test]
fn domain_errors_exit_three() {
    let out = maglab(&["beta", "--space", "padic:p=4", "--z", "1"]);
    assert_eq!(out.code, EXIT_DOMAIN);
    assert_eq!(error_name(&out), "NotPrime");
    let out = maglab(&["convert", "--gamma", "1", "--coeffs", "0,1", "--from-nu", "1", "--to-nu", "2"]);
    assert_eq!(error_name(&out), "ZeroLeadingCoefficient");
}

#[test]
fn help_exits_zero() {
    let out = maglab(&["--help"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("verify-thm2"));
}

#[test]
fn verify_sphere_and_tolerance_env() {
    let args = ["maglab", "verify-thm2", "--space", "sphere:n=2", "--order", "2", "--nu", "1,-1"];
    let out = run_with_env(args, Some("1e-6"));
    let doc = json(&out);
    assert_eq!(doc["consistent"], true, "{doc}");
    assert_eq!(doc["report"]["tol"].as_f64(), Some(1e-6));
    let bad = run_with_env(args, Some("loose"));
    assert_eq!(bad.code, EXIT_PARSE);
}

#[test]
fn expand_geodesic_sphere() {
    let doc = json(&maglab(&["expand", "--space", "sphere:n=2:metric=geodesic", "--order", "2"]));
    assert_eq!(doc["gamma"].as_f64(), Some(-2.0));
    let a0 = doc["fit"]["expansion"]["coeffs"][0]["re"].as_f64().unwrap();
    assert!((a0 - 0.5).abs() < 1e-10, "{doc}");
}
