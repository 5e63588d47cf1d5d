//! Busemann–Petty experiments: section-dominance comparisons, Lutwak's
//! volume comparison for intersection bodies, the positivity suite in E³ and
//! the cube/ball pair in dimension ten and above.
//!
//! Dominance is only ever checked on a finite seeded sample of directions, so
//! every report carries its sample size, the worst direction and the
//! tolerances in force.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use crate::error::{GeoError, Result};
use crate::radon::{
    closed_form_volume, is_intersection_body, section_table, volume, IntersectionBody, SubsphereIntegral,
};
use crate::settings::Settings;
use crate::sphere_quad::{
    ball_volume, norm, random_directions, synthesize_grid, Direction, HarmonicSpectrum, Householder, SphereGrid,
};
use crate::star_body::{convexity_probe, BodyDescriptor, HarmonicTerm, RadialFunction, StarBody};

/// Outcome of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Sections of `K₁` are dominated and so is its volume.
    Consistent,
    /// Sections of `K₁` are dominated but its volume is larger.
    Counterexample,
    /// Some sampled section of `K₁` exceeds that of `K₂`.
    DominanceFails,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Counterexample => "counterexample",
            Verdict::DominanceFails => "dominance-fails",
        }
    }
}

/// Relative tolerances: `s₁ <= s₂ (1 + section)` counts as dominated and
/// `V₁ > V₂ (1 + volume)` as a volume violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub section: f64,
    pub volume: f64,
}

impl Tolerances {
    /// Tight on S² where sections are exact quadrature; Monte Carlo sized above.
    pub fn for_dim(n: usize) -> Self {
        if n <= 3 {
            Tolerances { section: 1e-8, volume: 1e-8 }
        } else {
            Tolerances { section: 0.02, volume: 1e-6 }
        }
    }
}

/// Default number of sampled directions.
pub fn default_directions(n: usize) -> usize {
    if n <= 6 {
        512
    } else {
        2048
    }
}

/// Result of [`bp_compare`].
#[derive(Debug, Clone, Serialize)]
pub struct BPReport {
    pub k1: BodyDescriptor,
    pub k2: BodyDescriptor,
    pub n: usize,
    pub directions: usize,
    pub seed: u64,
    /// `min_u λ(K₂∩u⊥) - λ(K₁∩u⊥)` over the sample.
    pub min_gap: f64,
    pub max_gap: f64,
    /// `min_u (λ(K₂∩u⊥) - λ(K₁∩u⊥)) / λ(K₂∩u⊥)`.
    pub min_relative_gap: f64,
    pub worst_direction: Vec<f64>,
    pub max_section_k1: f64,
    pub max_section_k2: f64,
    pub volume_k1: f64,
    pub volume_k2: f64,
    pub volume_method_k1: &'static str,
    pub volume_method_k2: &'static str,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    pub settings: Settings,
}

/// Volume from the closed form when one exists, else by quadrature.
fn body_volume(body: &StarBody, settings: &Settings) -> Result<(f64, &'static str)> {
    match closed_form_volume(body.descriptor()) {
        Some(v) => Ok((v, "closed_form")),
        None => {
            let method = if body.dim() <= 3 { "quadrature" } else { "monte_carlo" };
            Ok((volume(body, settings)?, method))
        }
    }
}

/// Compares `K₁` against `K₂` on `count` seeded uniform directions.
pub fn bp_compare(
    k1: &StarBody,
    k2: &StarBody,
    count: usize,
    seed: u64,
    tol: Option<Tolerances>,
    settings: &Settings,
) -> Result<BPReport> {
    let n = k1.dim();
    if k2.dim() != n {
        return Err(GeoError::DimensionMismatch { expected: n, got: k2.dim() });
    }
    if count == 0 {
        return Err(GeoError::invalid("need at least one direction"));
    }
    let tol = tol.unwrap_or_else(|| Tolerances::for_dim(n));
    let settings = settings.with_seed(seed);
    let dirs = random_directions(n, count, seed);
    let s1 = section_table(k1, &dirs, &settings)?.values;
    let s2 = section_table(k2, &dirs, &settings)?.values;

    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    let mut min_rel = f64::INFINITY;
    let mut worst = 0;
    for (k, (a, b)) in s1.iter().zip(&s2).enumerate() {
        let gap = b - a;
        min_gap = min_gap.min(gap);
        max_gap = max_gap.max(gap);
        let rel = gap / b;
        if rel < min_rel {
            min_rel = rel;
            worst = k;
        }
    }
    let (v1, m1) = body_volume(k1, &settings)?;
    let (v2, m2) = body_volume(k2, &settings)?;
    let verdict = if min_rel < -tol.section {
        Verdict::DominanceFails
    } else if v1 > v2 * (1.0 + tol.volume) {
        Verdict::Counterexample
    } else {
        Verdict::Consistent
    };
    Ok(BPReport {
        k1: k1.descriptor().clone(),
        k2: k2.descriptor().clone(),
        n,
        directions: count,
        seed,
        min_gap,
        max_gap,
        min_relative_gap: min_rel,
        worst_direction: dirs[worst].as_slice().to_vec(),
        max_section_k1: s1.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_section_k2: s2.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        volume_k1: v1,
        volume_k2: v2,
        volume_method_k1: m1,
        volume_method_k2: m2,
        verdict,
        tolerances: tol,
        settings,
    })
}

/// A named direction with both section volumes.
#[derive(Debug, Clone, Serialize)]
pub struct SectionProbe {
    pub label: String,
    pub direction: Vec<f64>,
    pub cube_section: f64,
    pub ball_section: f64,
}

/// The unit cube against the ball whose sections all equal the largest
/// cube section `√2`.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub n: usize,
    pub cube: BodyDescriptor,
    pub radius: f64,
    pub cube_volume: f64,
    pub ball_volume: f64,
    pub max_cube_section: f64,
    pub probes: Vec<SectionProbe>,
    pub report: BPReport,
}

/// Radius of the `n`-ball whose central sections have volume `√2`.
pub fn counterexample_radius(n: usize) -> f64 {
    (SQRT_2 / ball_volume(n - 1)).powf(1.0 / (n - 1) as f64)
}

/// Builds and verifies the cube/ball pair in `Rⁿ`, `n >= 10`.
pub fn ball_counterexample(n: usize, count: usize, seed: u64, settings: &Settings) -> Result<Counterexample> {
    if n < 10 {
        return Err(GeoError::unsupported(format!("the cube/ball pair needs n >= 10, got {n}")));
    }
    let cube = StarBody::new(BodyDescriptor::Cuboid { n, half_sides: vec![0.5; n] })?;
    let radius = counterexample_radius(n);
    let ball = StarBody::new(BodyDescriptor::Ball { n, r: radius })?;
    let report = bp_compare(&cube, &ball, count, seed, None, settings)?;
    let mut diag = vec![0.0; n];
    diag[0] = 1.0;
    diag[1] = 1.0;
    let probe_dirs = [("e1", Direction::axis(n, 0)), ("(e1+e2)/sqrt2", Direction::new(diag)?)];
    let table = section_table(&cube, &probe_dirs.iter().map(|p| p.1.clone()).collect::<Vec<_>>(), &report.settings)?;
    let ball_section = ball_volume(n - 1) * radius.powi(n as i32 - 1);
    let probes = probe_dirs
        .iter()
        .zip(&table.values)
        .map(|((label, u), v)| SectionProbe {
            label: label.to_string(),
            direction: u.as_slice().to_vec(),
            cube_section: *v,
            ball_section,
        })
        .collect();
    Ok(Counterexample {
        n,
        cube: cube.descriptor().clone(),
        radius,
        cube_volume: report.volume_k1,
        ball_volume: report.volume_k2,
        max_cube_section: SQRT_2,
        probes,
        report,
    })
}

/// Best direction found by [`max_section_search`].
#[derive(Debug, Clone, Serialize)]
pub struct MaxSection {
    pub direction: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Coordinate axes and normalized pair sums `(e_i ± e_j)/√2`.
fn structured_directions(n: usize) -> Vec<Direction> {
    let mut out: Vec<Direction> = (0..n).map(|i| Direction::axis(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v[j] = s;
                out.push(Direction::new(v).expect("nonzero"));
            }
        }
    }
    out
}

/// Compass ascent of `f` on the sphere from `u`, tangent steps along the
/// Householder completion of the current point.
fn ascend(f: &(impl Fn(&[f64]) -> f64 + Sync), u: &[f64], value: f64, min_step: f64, evals: &mut usize) -> (Vec<f64>, f64) {
    let n = u.len();
    let (mut best_u, mut best) = (u.to_vec(), value);
    let mut step = 0.2;
    while step > min_step {
        let h = Householder::new(&best_u);
        let candidates: Vec<Vec<f64>> = (1..n)
            .flat_map(|k| {
                let t = h.column(k);
                [1.0, -1.0].map(|s| {
                    let v: Vec<f64> = best_u.iter().zip(&t).map(|(a, b)| a + s * step * b).collect();
                    let r = norm(&v);
                    v.into_iter().map(|c| c / r).collect::<Vec<f64>>()
                })
            })
            .collect();
        let values: Vec<f64> = candidates.par_iter().map(|v| f(v)).collect();
        *evals += values.len();
        let (k, v) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        if v > best {
            best = v;
            best_u = candidates[k].clone();
        } else {
            step *= 0.5;
        }
    }
    (best_u, best)
}

/// Maximizes `f` over `S^{n-1}`: scores structured and `random_starts`
/// random directions, then runs compass ascent from the best `ascents`.
fn maximize_on_sphere(
    n: usize,
    f: impl Fn(&[f64]) -> f64 + Sync,
    random_starts: usize,
    ascents: usize,
    seed: u64,
    min_step: f64,
) -> Result<MaxSection> {
    if ascents == 0 {
        return Err(GeoError::invalid("restarts must be >= 1"));
    }
    let mut starts = structured_directions(n);
    starts.extend(random_directions(n, random_starts, seed));
    let mut scored: Vec<(usize, f64)> = starts.par_iter().map(|u| f(u.as_slice())).enumerate().collect();
    let mut evals = scored.len();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut best = (starts[scored[0].0].as_slice().to_vec(), scored[0].1);
    for &(k, v) in scored.iter().take(ascents) {
        let (u, value) = ascend(&f, starts[k].as_slice(), v, min_step, &mut evals);
        if value > best.1 {
            best = (u, value);
        }
    }
    Ok(MaxSection { direction: best.0, value: best.1, evaluations: evals })
}

/// Largest central section of `body`, by derivative-free ascent.
pub fn max_section_search<B: RadialFunction>(
    body: &B,
    restarts: usize,
    seed: u64,
    settings: &Settings,
) -> Result<MaxSection> {
    let rule = SubsphereIntegral::new(body.dim(), &settings.with_seed(seed))?;
    // Monte Carlo objectives are rough below the sampling error; stop early.
    let min_step = if rule.is_exact() { 1e-7 } else { 1e-2 };
    maximize_on_sphere(body.dim(), |u| rule.section(body, u), restarts, restarts, seed, min_step)
}

/// Result of [`lutwak_check`].
#[derive(Debug, Clone, Serialize)]
pub struct LutwakReport {
    pub m: BodyDescriptor,
    pub l2: BodyDescriptor,
    pub directions: usize,
    pub seed: u64,
    /// Smallest `s` with `λ(IM∩u⊥) <= λ(sL₂∩u⊥)` on the sample.
    pub scale: f64,
    pub scale_direction: Vec<f64>,
    pub volume_l1: f64,
    pub volume_scaled_l2: f64,
    /// `(λ₃(sL₂) - λ₃(IM)) / λ₃(IM)`.
    pub margin: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Nodes of the inner great-circle rule defining `IM`.
pub const INNER_NODES: usize = 64;
/// Local ascents run from the best sampled directions.
const LUTWAK_ASCENTS: usize = 4;

/// Checks `λ₃(L₁) <= λ₃(sL₂)` for `L₁ = IM` and the smallest `s` making
/// `sL₂` dominate the sections of `L₁`.
pub fn lutwak_check(
    m: &StarBody,
    l2: &StarBody,
    count: usize,
    seed: u64,
    tol: f64,
    settings: &Settings,
) -> Result<LutwakReport> {
    if m.dim() != 3 || l2.dim() != 3 {
        return Err(GeoError::unsupported("the Lutwak check runs in E³ only"));
    }
    let l1 = IntersectionBody::with_rule(m, SubsphereIntegral::with_nodes(3, INNER_NODES, 0)?)?;
    let outer = SubsphereIntegral::new(3, settings)?;
    let ratio = |u: &[f64]| outer.section(&l1, u) / outer.section(l2, u);
    let best = maximize_on_sphere(3, ratio, count, LUTWAK_ASCENTS, seed, 1e-9)?;
    let scale = best.value.sqrt();
    let volume_l1 = volume(&l1, settings)?;
    let volume_scaled_l2 = scale.powi(3) * volume(l2, settings)?;
    let margin = (volume_scaled_l2 - volume_l1) / volume_l1;
    Ok(LutwakReport {
        m: m.descriptor().clone(),
        l2: l2.descriptor().clone(),
        directions: count,
        seed,
        scale,
        scale_direction: best.direction,
        volume_l1,
        volume_scaled_l2,
        margin,
        tol,
        holds: margin >= -tol,
    })
}

/// Random centered perturbed ball `r0 (1 + a p)` with `p` a combination of
/// even harmonics of degree <= 6 normalized to `max |p| = 1` on a grid.
fn random_perturbed_ball(rng: &mut ChaCha8Rng, r0: f64, max_amplitude: f64) -> Result<BodyDescriptor> {
    let mut coeffs = Vec::new();
    for l in [2usize, 4, 6] {
        for m in -(l as i64)..=l as i64 {
            if rng.gen_bool(0.5) {
                let c: f64 = rng.sample(StandardNormal);
                coeffs.push(HarmonicTerm { l, m, c });
            }
        }
    }
    if coeffs.is_empty() {
        coeffs.push(HarmonicTerm { l: 2, m: 0, c: 1.0 });
    }
    let terms: Vec<_> = coeffs.iter().map(|t| (t.l, t.m, t.c)).collect();
    let spectrum = HarmonicSpectrum::from_terms(&terms)?;
    let peak = synthesize_grid(&spectrum, &SphereGrid::new(32, 64)?)
        .into_iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    let amplitude = r0 * rng.gen_range(0.2..1.0) * max_amplitude / peak;
    Ok(BodyDescriptor::PerturbedBall { r0, amplitude, coeffs })
}

/// Random smooth centered convex body: an ellipsoid with axis ratios in
/// `[1, 5]` or a perturbed ball with relative amplitude below 0.15. Returns
/// the body and the number of candidates rejected by the convexity probe.
pub fn random_convex_body(rng: &mut ChaCha8Rng) -> Result<(StarBody, usize)> {
    let scale = rng.gen_range(0.5..2.0);
    let mut rejected = 0;
    loop {
        let desc = if rng.gen_bool(0.5) {
            let mut axes = vec![1.0, rng.gen_range(1.0..5.0), rng.gen_range(1.0..5.0)];
            let k = rng.gen_range(0..3);
            axes.swap(0, k);
            BodyDescriptor::Ellipsoid { semi_axes: axes.iter().map(|a| a * scale).collect() }
        } else {
            random_perturbed_ball(rng, scale, 0.15)?
        };
        let body = StarBody::new(desc)?;
        if body.is_convex_by_construction() || convexity_probe(&body, 10_000, rng.gen()).passed() {
            return Ok((body, rejected));
        }
        rejected += 1;
    }
}

/// Random smooth centered star body: a perturbed ball with relative amplitude
/// below 0.4, or an ellipsoid.
pub fn random_star_body(rng: &mut ChaCha8Rng) -> Result<StarBody> {
    let scale = rng.gen_range(0.5..2.0);
    let desc = if rng.gen_bool(0.3) {
        BodyDescriptor::Ellipsoid { semi_axes: (0..3).map(|_| scale * rng.gen_range(1.0..3.0)).collect() }
    } else {
        random_perturbed_ball(rng, scale, 0.4)?
    };
    StarBody::new(desc)
}

/// One body of the positivity suite.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityRow {
    pub body_id: usize,
    pub margin: f64,
    pub volume: f64,
    pub verdict: &'static str,
    pub cross_check_error: f64,
}

/// Result of [`e3_positivity_suite`].
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
    pub resolution: usize,
    pub rejected: usize,
    pub min_margin: f64,
    pub worst_body_id: usize,
    pub worst_body: BodyDescriptor,
    pub rows: Vec<PositivityRow>,
}

impl PositivityReport {
    /// CSV with header `body_id,margin,volume,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("body_id,margin,volume,verdict\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.body_id, r.margin, r.volume, r.verdict);
        }
        out
    }
}

/// Default grid resolution of the positivity suite.
pub const SUITE_RESOLUTION: usize = 48;

/// Runs the intersection-body test on the unit ball followed by `count - 1`
/// random smooth centered convex bodies.
pub fn e3_positivity_suite(
    count: usize,
    seed: u64,
    tol: f64,
    resolution: usize,
    settings: &Settings,
) -> Result<PositivityReport> {
    if count == 0 {
        return Err(GeoError::invalid("count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bodies = vec![StarBody::new(BodyDescriptor::Ball { n: 3, r: 1.0 })?];
    let mut rejected = 0;
    while bodies.len() < count {
        let (body, r) = random_convex_body(&mut rng)?;
        rejected += r;
        bodies.push(body);
    }
    let rows: Vec<Result<PositivityRow>> = bodies
        .par_iter()
        .enumerate()
        .map(|(id, body)| {
            let v = is_intersection_body(body, Some(tol), resolution, seed.wrapping_add(id as u64))?;
            let (volume, _) = body_volume(body, settings)?;
            Ok(PositivityRow {
                body_id: id,
                margin: v.margin,
                volume,
                verdict: if v.is_intersection_body { "intersection_body" } else { "not_intersection_body" },
                cross_check_error: v.cross_check_error,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .fold(&rows[0], |w, r| if r.margin < w.margin { r } else { w });
    Ok(PositivityReport {
        count,
        seed,
        tol,
        resolution,
        rejected,
        min_margin: worst.margin,
        worst_body_id: worst.body_id,
        worst_body: bodies[worst.body_id].descriptor().clone(),
        rows,
    })
}

#[cfg(test)]
mod tests;
