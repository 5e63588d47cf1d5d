use super::*;

fn run_args(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("geotom").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, out, err) = run_args(&["frobnicate"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "usage");
}

#[test]
fn missing_body_is_invalid() {
    let (code, _, err) = run_args(&["volume"]);
    assert_eq!(code, EXIT_INVALID);
    assert_eq!(err.lines().count(), 1);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "invalid-parameter");
}

#[test]
fn pole_parsing() {
    assert_eq!(parse_pole(Some("0,0,2"), 3).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
    assert_eq!(parse_pole(None, 3).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
    assert!(matches!(parse_pole(Some("1,2"), 3), Err(GeoError::DimensionMismatch { .. })));
    assert!(parse_pole(Some("1,x,2"), 3).is_err());
    assert!(parse_pole(Some("0,0,0"), 3).is_err());
}

#[test]
fn exit_codes_by_error() {
    assert_eq!(exit_code(&GeoError::NoConvergence { what: "x".into(), residual: 1.0, tol: 0.1 }), 3);
    assert_eq!(exit_code(&GeoError::NotAnIntersectionBody { margin: -1.0, witness: vec![0.0, 0.0, 1.0] }), 4);
    assert_eq!(exit_code(&GeoError::Parse { path: "r".into(), message: "m".into() }), 2);
    let d = diagnostic(&GeoError::Parse { path: "r".into(), message: "m".into() });
    assert_eq!(d["path"], "r");
}

#[test]
fn counterexample_below_ten_is_invalid() {
    let (code, _, err) = run_args(&["counterexample", "--n", "5"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("unsupported-body"));
}
