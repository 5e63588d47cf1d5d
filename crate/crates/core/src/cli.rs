//! The `geotom` command line.
//!
//! ```text
//! geotom <subcommand> --body <path> [--body2 <path>] [--pole x,y,z]
//!        [--method abel|eq1|harmonic] [--n <int>] [--seed <int>]
//!        [--resolution <int>] [--tol <float>] [--format json|csv] [--out <path>]
//! ```
//!
//! Exit codes: 0 success, 2 parse or validation error, 3 numerical
//! non-convergence, 4 a negative verdict. Diagnostics go to standard error
//! as one line of JSON.

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bp_lab::{
    ball_counterexample, bp_compare, default_directions, e3_positivity_suite, Tolerances, Verdict, SUITE_RESOLUTION,
};
use crate::error::{GeoError, Result};
use crate::radon::{
    closed_form_volume, funk_invert_abel, funk_invert_eq1, harmonic_invert_body, is_intersection_body,
    radon_transform, section_table, volume, AbelParams, Eq1Params, Method,
};
use crate::settings::Settings;
use crate::sphere_quad::{random_directions, Direction};
use crate::star_body::{RadialFunction, Smoothness, StarBody};
use crate::symmetral::{schwarz_symmetral, symmetral_invariance_gap, ConvexBody, DEFAULT_GRID, PROBE_TRIALS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_NEGATIVE: i32 = 4;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "GEOTOM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Volume,
    Sections,
    Radon,
    Invert,
    IntersectionTest,
    Symmetral,
    BpCheck,
    Counterexample,
    PositivitySuite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Volume => "volume",
            Command::Sections => "sections",
            Command::Radon => "radon",
            Command::Invert => "invert",
            Command::IntersectionTest => "intersection-test",
            Command::Symmetral => "symmetral",
            Command::BpCheck => "bp-check",
            Command::Counterexample => "counterexample",
            Command::PositivitySuite => "positivity-suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Abel,
    Eq1,
    Harmonic,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Abel => Method::Abel,
            MethodArg::Eq1 => Method::Eq1,
            MethodArg::Harmonic => Method::Harmonic,
        }
    }
}

/// Numerical geometric tomography.
#[derive(Debug, Parser)]
#[command(name = "geotom", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Body descriptor (JSON).
    #[arg(long)]
    pub body: Option<PathBuf>,
    /// Second body for `bp-check`.
    #[arg(long)]
    pub body2: Option<PathBuf>,
    /// Pole or axis as comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub pole: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Directions (`sections`, `radon`, `bp-check`), dimension
    /// (`counterexample`) or body count (`positivity-suite`).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid resolution: latitudes of the S² grid, or heights of a symmetral.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A rendered report and the exit code it carries.
struct Outcome {
    json: Value,
    csv: String,
    code: i32,
}

impl Outcome {
    fn ok(json: Value, csv: String) -> Self {
        Outcome { json, csv, code: EXIT_OK }
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn read_body(path: Option<&Path>, flag: &str) -> Result<StarBody> {
    let path = path.ok_or_else(|| GeoError::invalid(format!("--{flag} is required")))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeoError::invalid(format!("cannot read {}: {e}", path.display())))?;
    StarBody::parse(&text)
}

fn parse_pole(text: Option<&str>, n: usize) -> Result<Direction> {
    let Some(text) = text else {
        return Ok(Direction::axis(n, n - 1));
    };
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| GeoError::invalid(format!("bad coordinate `{c}` in --pole"))))
        .collect::<Result<Vec<f64>>>()?;
    if coords.len() != n {
        return Err(GeoError::DimensionMismatch { expected: n, got: coords.len() });
    }
    Direction::new(coords)
}

fn positive_tol(tol: Option<f64>) -> Result<Option<f64>> {
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(GeoError::invalid(format!("--tol must be >= 0, got {t}"))),
        t => Ok(t),
    }
}

fn settings_for(cli: &Cli) -> Result<Settings> {
    let mut s = Settings::default().with_seed(cli.seed.unwrap_or(0));
    if let Some(r) = cli.resolution {
        if r < 8 {
            return Err(GeoError::invalid(format!("--resolution must be >= 8, got {r}")));
        }
        s.sphere_lat = r;
    }
    Ok(s)
}

fn csv_row(header: &[&str], values: &[String]) -> String {
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn volume_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    let settings = settings_for(cli)?;
    let v = volume(&body, &settings)?;
    let exact = closed_form_volume(body.descriptor());
    let method = if body.dim() <= 3 { "quadrature" } else { "monte_carlo" };
    let json = json!({
        "volume": v,
        "closed_form": exact,
        "dim": body.dim(),
        "method": method,
        "settings": to_value(&settings),
    });
    Ok(Outcome::ok(json, csv_row(&["volume"], &[v.to_string()])))
}

fn directions_for(cli: &Cli, n: usize) -> Result<Vec<Direction>> {
    if let Some(p) = cli.pole.as_deref() {
        return Ok(vec![parse_pole(Some(p), n)?]);
    }
    let count = cli.n.unwrap_or(64);
    if count == 0 {
        return Err(GeoError::invalid("--n must be >= 1"));
    }
    Ok(random_directions(n, count, cli.seed.unwrap_or(0)))
}

fn sections_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    let settings = settings_for(cli)?;
    let dirs = directions_for(cli, body.dim())?;
    let table = section_table(&body, &dirs, &settings)?;
    let mut json = to_value(&table);
    json["settings"] = to_value(&settings);
    Ok(Outcome::ok(json, table.to_csv()))
}

fn radon_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    let settings = settings_for(cli)?;
    let dirs = directions_for(cli, body.dim())?;
    let values = dirs
        .iter()
        .map(|u| radon_transform(|v| body.radial(v), u, &settings))
        .collect::<Result<Vec<f64>>>()?;
    let mut csv = String::new();
    for i in 1..=body.dim() {
        let _ = write!(csv, "u_{i},");
    }
    csv.push_str("radon\n");
    for (u, v) in dirs.iter().zip(&values) {
        for c in u.as_slice() {
            let _ = write!(csv, "{c},");
        }
        let _ = writeln!(csv, "{v}");
    }
    let json = json!({
        "function": "radial",
        "directions": to_value(&dirs),
        "values": values,
        "settings": to_value(&settings),
    });
    Ok(Outcome::ok(json, csv))
}

fn invert_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    if body.dim() != 3 {
        return Err(GeoError::unsupported(format!("inversion runs on S² only, body is in R^{}", body.dim())));
    }
    let pole = parse_pole(cli.pole.as_deref(), 3)?;
    let method: Method = cli.method.unwrap_or(MethodArg::Eq1).into();
    let settings = settings_for(cli)?;
    let mut extra = Map::new();
    let g = match method {
        Method::Eq1 => {
            let params = Eq1Params::default();
            extra.insert("params".into(), to_value(&params));
            funk_invert_eq1(&body, &pole, &params)?
        }
        Method::Abel => {
            let mut params = AbelParams::default();
            if let Some(t) = positive_tol(cli.tol)? {
                params.tol = t;
            }
            let r = funk_invert_abel(&body, &pole, &params)?;
            extra.insert("params".into(), to_value(&params));
            extra.insert("extrapolation_residual".into(), json!(r.residual));
            r.g
        }
        Method::Harmonic => {
            let inv = harmonic_invert_body(&body, &settings, None)?;
            extra.insert("diagnostics".into(), to_value(&inv.diagnostics));
            extra.insert("settings".into(), to_value(&settings));
            inv.evaluate(pole.as_slice()).expect("harmonic route keeps its spectrum")
        }
    };
    let mut json = json!({ "method": to_value(&method), "pole": to_value(&pole), "g": g });
    json.as_object_mut().expect("object").extend(extra);
    let p = pole.as_slice();
    let csv = csv_row(
        &["method", "u_1", "u_2", "u_3", "g"],
        &[method.to_string(), p[0].to_string(), p[1].to_string(), p[2].to_string(), g.to_string()],
    );
    Ok(Outcome::ok(json, csv))
}

fn intersection_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    let resolution = cli.resolution.unwrap_or(32);
    let v = is_intersection_body(&body, positive_tol(cli.tol)?, resolution, cli.seed.unwrap_or(0))?;
    let code = if v.is_intersection_body { EXIT_OK } else { EXIT_NEGATIVE };
    let csv = csv_row(
        &["is_intersection_body", "margin", "tol", "witness_1", "witness_2", "witness_3"],
        &[
            v.is_intersection_body.to_string(),
            v.margin.to_string(),
            v.tol.to_string(),
            v.witness[0].to_string(),
            v.witness[1].to_string(),
            v.witness[2].to_string(),
        ],
    );
    Ok(Outcome { json: to_value(&v), csv, code })
}

fn symmetral_cmd(cli: &Cli) -> Result<Outcome> {
    let body = read_body(cli.body.as_deref(), "body")?;
    if body.dim() != 3 {
        return Err(GeoError::unsupported(format!("symmetrals are built in E³, body is in R^{}", body.dim())));
    }
    let axis = parse_pole(cli.pole.as_deref(), 3)?;
    let seed = cli.seed.unwrap_or(0);
    let grid = cli.resolution.unwrap_or(DEFAULT_GRID);
    let settings = Settings::default().with_seed(seed);
    let convex = ConvexBody::certify(body, PROBE_TRIALS, seed)?;
    let profile = schwarz_symmetral(&convex, &axis, grid)?;
    let mut json = to_value(&profile);
    json["grid_size"] = json!(grid);
    json["volume_body"] = json!(volume(convex.inner(), &settings)?);
    json["volume_symmetral"] = json!(volume(&profile, &settings)?);
    if convex.smoothness() >= Smoothness::C1 {
        json["invariance"] = to_value(&symmetral_invariance_gap(&convex, &axis)?);
    }
    Ok(Outcome::ok(json, profile.to_csv()))
}

fn bp_row(verdict: Verdict, min_gap: f64, min_rel: f64, v1: f64, v2: f64) -> Vec<String> {
    vec![verdict.as_str().to_string(), min_gap.to_string(), min_rel.to_string(), v1.to_string(), v2.to_string()]
}

const BP_HEADER: [&str; 5] = ["verdict", "min_gap", "min_relative_gap", "volume_k1", "volume_k2"];

fn bp_check_cmd(cli: &Cli) -> Result<Outcome> {
    let k1 = read_body(cli.body.as_deref(), "body")?;
    let k2 = read_body(cli.body2.as_deref(), "body2")?;
    let count = cli.n.unwrap_or_else(|| default_directions(k1.dim()));
    let tol = positive_tol(cli.tol)?.map(|t| Tolerances { section: t, volume: t });
    let r = bp_compare(&k1, &k2, count, cli.seed.unwrap_or(0), tol, &Settings::default())?;
    let code = if r.verdict == Verdict::Consistent { EXIT_OK } else { EXIT_NEGATIVE };
    let csv = csv_row(&BP_HEADER, &bp_row(r.verdict, r.min_gap, r.min_relative_gap, r.volume_k1, r.volume_k2));
    Ok(Outcome { json: to_value(&r), csv, code })
}

fn counterexample_cmd(cli: &Cli) -> Result<Outcome> {
    let n = cli.n.unwrap_or(10);
    let count = default_directions(n);
    let c = ball_counterexample(n, count, cli.seed.unwrap_or(0), &Settings::default())?;
    let r = &c.report;
    let code = if r.verdict == Verdict::Counterexample { EXIT_OK } else { EXIT_NEGATIVE };
    let csv = csv_row(&BP_HEADER, &bp_row(r.verdict, r.min_gap, r.min_relative_gap, r.volume_k1, r.volume_k2));
    Ok(Outcome { json: to_value(&c), csv, code })
}

fn positivity_cmd(cli: &Cli) -> Result<Outcome> {
    let count = cli.n.unwrap_or(100);
    let tol = positive_tol(cli.tol)?.unwrap_or(1e-6);
    let resolution = cli.resolution.unwrap_or(SUITE_RESOLUTION);
    let r = e3_positivity_suite(count, cli.seed.unwrap_or(42), tol, resolution, &Settings::default())?;
    let code = if r.min_margin >= -tol { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome { json: to_value(&r), csv: r.to_csv(), code })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match cli.command {
        Command::Volume => volume_cmd(cli),
        Command::Sections => sections_cmd(cli),
        Command::Radon => radon_cmd(cli),
        Command::Invert => invert_cmd(cli),
        Command::IntersectionTest => intersection_cmd(cli),
        Command::Symmetral => symmetral_cmd(cli),
        Command::BpCheck => bp_check_cmd(cli),
        Command::Counterexample => counterexample_cmd(cli),
        Command::PositivitySuite => positivity_cmd(cli),
    }
}

/// Exit code for an error.
pub fn exit_code(err: &GeoError) -> i32 {
    match err {
        GeoError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        GeoError::NotAnIntersectionBody { .. } => EXIT_NEGATIVE,
        _ => EXIT_INVALID,
    }
}

/// One-line JSON diagnostic for an error.
pub fn diagnostic(err: &GeoError) -> Value {
    let mut v = json!({ "error": err.kind(), "message": err.to_string() });
    match err {
        GeoError::Parse { path, .. } => v["path"] = json!(path),
        GeoError::NoConvergence { residual, tol, .. } => {
            v["residual"] = json!(residual);
            v["tol"] = json!(tol);
        }
        GeoError::NotAnIntersectionBody { margin, witness } => {
            v["margin"] = json!(margin);
            v["witness"] = json!(witness);
        }
        _ => {}
    }
    v
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // A pool may already exist when called twice in one process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let _ = writeln!(stderr, "{}", json!({ "error": "usage", "message": first }));
            return EXIT_INVALID;
        }
    };
    configure_threads();
    let mut outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "{}", diagnostic(&e));
            return exit_code(&e);
        }
    };
    if let Some(obj) = outcome.json.as_object_mut() {
        obj.insert("command".into(), json!(cli.command.name()));
    }
    let mut text = match cli.format {
        Format::Json => serde_json::to_string(&outcome.json).expect("json"),
        Format::Csv => outcome.csv,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "{}", diagnostic(&GeoError::Io(e)));
        return EXIT_INVALID;
    }
    if outcome.code != EXIT_OK {
        let _ = writeln!(stderr, "{}", json!({ "verdict": "negative", "command": cli.command.name() }));
    }
    outcome.code
}

#[cfg(test)]
mod tests;
