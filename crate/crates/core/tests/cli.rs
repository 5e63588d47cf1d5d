use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    root().join("tests/fixtures").join(name).display().to_string()
}

fn geotom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geotom"))
        .args(args)
        .env("GEOTOM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn schema_check(name: &str, instance: &Value) {
    let text = std::fs::read_to_string(root().join("schemas").join(format!("{name}.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).expect("diagnostic is one JSON line"))
        .collect()
}

#[test]
fn volume_of_unit_ball() {
    let out = geotom(&["volume", "--body", &fixture("ball3.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    schema_check("volume", &v);
    assert!((v["volume"].as_f64().unwrap() - 4.1887902047863905).abs() < 1e-10);
}

#[test]
fn invert_ball_with_every_method() {
    for method in ["eq1", "abel", "harmonic"] {
        let out = geotom(&["invert", "--body", &fixture("ball3.json"), "--method", method, "--pole", "0,0,1"]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let v = json_of(&out);
        schema_check("invert", &v);
        assert!((v["g"].as_f64().unwrap() - 0.1591549430918953).abs() < 1e-9, "{method}");
    }
}

#[test]
fn sections_and_radon_reports() {
    let out = geotom(&["sections", "--body", &fixture("ellipsoid123.json"), "--n", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    schema_check("sections", &json_of(&out));
    let out = geotom(&["radon", "--body", &fixture("ball3.json"), "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    schema_check("radon", &v);
    assert!((v["values"][0].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    let csv = geotom(&["sections", "--body", &fixture("ball3.json"), "--n", "2", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("u_1,u_2,u_3,section_volume"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn intersection_test_verdicts() {
    let out = geotom(&["intersection-test", "--body", &fixture("ball3.json")]);
    assert_eq!(out.status.code(), Some(0));
    schema_check("intersection-test", &json_of(&out));
    let out = geotom(&["intersection-test", "--body", &fixture("negative_margin.json")]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    schema_check("intersection-test", &v);
    assert_eq!(v["is_intersection_body"], false);
    for line in stderr_lines(&out) {
        schema_check("error", &line);
    }
}

#[test]
fn symmetral_report() {
    let out = geotom(&["symmetral", "--body", &fixture("ellipsoid123.json"), "--resolution", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    schema_check("symmetral", &v);
    assert!((v["z_max"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!(v["invariance"]["gap"].as_f64().unwrap() < 1e-3);
    let csv = geotom(&["symmetral", "--body", &fixture("cube3.json"), "--resolution", "34", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("z,r\n"));
}

#[test]
fn dominance_failure_exits_four() {
    let out = geotom(&["bp-check", "--body", &fixture("ball3.json"), "--body2", &fixture("ball3_half.json")]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    schema_check("bp-check", &v);
    assert_eq!(v["verdict"], "dominance-fails");
    let out = geotom(&["bp-check", "--body", &fixture("ball3_half.json"), "--body2", &fixture("ball3.json"), "--n", "16"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["verdict"], "consistent");
}

#[test]
fn positivity_suite_report() {
    let out = geotom(&["positivity-suite", "--n", "3", "--resolution", "24"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    schema_check("positivity-suite", &v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn counterexample_report() {
    let out = geotom(&["counterexample", "--n", "10", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    schema_check("counterexample", &v);
    assert_eq!(v["report"]["verdict"], "counterexample");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = geotom(&[
            "positivity-suite",
            "--n",
            "4",
            "--seed",
            "11",
            "--resolution",
            "24",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let x = geotom(&["sections", "--body", &fixture("ellipsoid123.json"), "--n", "8", "--seed", "5"]);
    let y = geotom(&["sections", "--body", &fixture("ellipsoid123.json"), "--n", "8", "--seed", "5"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("torus.json");
    std::fs::write(&bad, r#"{"type": "torus", "r": 1.0}"#).unwrap();
    for args in [
        vec!["volume", "--body", bad.to_str().unwrap()],
        vec!["volume"],
        vec!["invert", "--body", &fixture("cube3.json")],
        vec!["invert", "--body", &fixture("ball3.json"), "--pole", "1,0"],
        vec!["nonsense"],
        vec!["volume", "--body", &fixture("ball3.json"), "--format", "xml"],
    ] {
        let out = geotom(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        let lines = stderr_lines(&out);
        assert_eq!(lines.len(), 1, "{args:?}");
        schema_check("error", &lines[0]);
    }
    let out = geotom(&["volume", "--body", bad.to_str().unwrap()]);
    assert_eq!(stderr_lines(&out)[0]["path"], "type");
}

#[test]
fn non_convergence_exits_three() {
    let out = geotom(&["invert", "--body", &fixture("ellipsoid123.json"), "--method", "abel", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let lines = stderr_lines(&out);
    assert_eq!(lines[0]["error"], "no-convergence");
    schema_check("error", &lines[0]);
}
