//! Volumes, central sections and the spherical Radon transform, plus the
//! inversion routes on S² (see [`inversion`]).
//!
//! For a star body `M ⊂ Rⁿ` the section function is the Radon transform of
//! `ρ_M^{n-1}/(n-1)`:
//!
//! ```text
//! λ_{n-1}(M ∩ u⊥) = (1/(n-1)) ∫_{S^{n-1} ∩ u⊥} ρ_M^{n-1}
//! ```
//!
//! On S² every subsphere integral is an exact periodic trapezoid; for `n > 3`
//! it is seeded Monte Carlo with samples shared between directions.

mod inversion;

pub use inversion::{
    funk_invert_abel, funk_invert_eq1, harmonic_invert, harmonic_invert_body, is_intersection_body,
    latitude_average, preimage_body, AbelParams, AbelResult, Diagnostics, Eq1Params, IntersectionVerdict,
    InversionResult, Method, Preimage,
};

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::error::{GeoError, Result};
use crate::settings::Settings;
use crate::sphere_quad::{ball_volume, gaussian_directions, sphere_area, Direction, GreatCircle, SubsphereSampler};
use crate::star_body::{tabulate, BodyDescriptor, RadialFunction, Smoothness, StarBody};

/// Integration over the great subspheres `S^{n-1} ∩ u⊥`.
#[derive(Debug, Clone)]
pub struct SubsphereIntegral {
    n: usize,
    rule: Rule,
}

#[derive(Debug, Clone)]
enum Rule {
    /// `S^0 ∩ u⊥` is the pair `±u^⊥` in the plane.
    Points,
    Circle(GreatCircle),
    Sampled(SubsphereSampler),
}

impl SubsphereIntegral {
    /// Great-circle trapezoid with `settings.great_circle` nodes on S²,
    /// `settings.mc_samples` shared Monte Carlo nodes for `n > 3`.
    pub fn new(n: usize, settings: &Settings) -> Result<Self> {
        Self::with_nodes(n, if n == 3 { settings.great_circle } else { settings.mc_samples }, settings.seed)
    }

    pub fn with_nodes(n: usize, nodes: usize, seed: u64) -> Result<Self> {
        let rule = match n {
            0 | 1 => return Err(GeoError::invalid(format!("no great subspheres in R^{n}"))),
            2 => Rule::Points,
            3 => Rule::Circle(GreatCircle::new(nodes)?),
            _ => Rule::Sampled(SubsphereSampler::new(n, nodes, seed)?),
        };
        Ok(SubsphereIntegral { n, rule })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when the rule is deterministic quadrature rather than sampling.
    pub fn is_exact(&self) -> bool {
        !matches!(self.rule, Rule::Sampled(_))
    }

    pub fn integrate(&self, u: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        match &self.rule {
            Rule::Points => f(&[-u[1], u[0]]) + f(&[u[1], -u[0]]),
            Rule::Circle(c) => c.integrate(u, f),
            Rule::Sampled(s) => s.integrate(u, f),
        }
    }

    /// Integral with its Monte Carlo standard error (zero for exact rules).
    pub fn estimate(&self, u: &[f64], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        match &self.rule {
            Rule::Sampled(s) => {
                let mut sum = 0.0;
                let mut sq = 0.0;
                s.for_each(u, |v| {
                    let y = f(v);
                    sum += y;
                    sq += y * y;
                });
                let count = s.count() as f64;
                let mean = sum / count;
                let var = (sq / count - mean * mean).max(0.0) * count / (count - 1.0);
                let area = sphere_area(self.n - 1);
                (area * mean, area * (var / count).sqrt())
            }
            _ => (self.integrate(u, f), 0.0),
        }
    }

    /// `λ_{n-1}(K ∩ u⊥)`.
    pub fn section<B: RadialFunction + ?Sized>(&self, body: &B, u: &[f64]) -> f64 {
        let k = (self.n - 1) as i32;
        self.integrate(u, |v| body.radial(v).powi(k)) / k as f64
    }

    pub fn section_estimate<B: RadialFunction + ?Sized>(&self, body: &B, u: &[f64]) -> (f64, f64) {
        let k = (self.n - 1) as i32;
        let (v, e) = self.estimate(u, |v| body.radial(v).powi(k));
        (v / k as f64, e / k as f64)
    }
}

/// `λ_n(K) = (1/n) ∫_{S^{n-1}} ρ_K^n` by the settings' sphere rule.
pub fn volume<B: RadialFunction + ?Sized>(body: &B, settings: &Settings) -> Result<f64> {
    let n = body.dim();
    let k = n as i32;
    let total = match n {
        2 => {
            let m = settings.great_circle;
            let vals: Vec<f64> = (0..m)
                .into_par_iter()
                .map(|j| {
                    let (s, c) = (2.0 * std::f64::consts::PI * j as f64 / m as f64).sin_cos();
                    body.radial(&[c, s]).powi(2)
                })
                .collect();
            vals.iter().sum::<f64>() * 2.0 * std::f64::consts::PI / m as f64
        }
        3 => {
            let grid = settings.sphere_grid()?;
            let vals = grid.sample(|u| body.radial(u).powi(3));
            grid.integrate_values(&vals)
        }
        _ => {
            let count = settings.mc_samples;
            if count < 100 {
                return Err(GeoError::invalid(format!("need at least 100 samples, got {count}")));
            }
            let dirs = gaussian_directions(n, count, settings.seed);
            let vals: Vec<f64> = dirs.par_chunks_exact(n).map(|u| body.radial(u).powi(k)).collect();
            vals.iter().sum::<f64>() * sphere_area(n) / count as f64
        }
    };
    Ok(total / n as f64)
}

/// Exact volume for the families with a closed form.
pub fn closed_form_volume(desc: &BodyDescriptor) -> Option<f64> {
    match desc {
        BodyDescriptor::Ball { n, r } => Some(ball_volume(*n) * r.powi(*n as i32)),
        BodyDescriptor::Ellipsoid { semi_axes } => {
            Some(ball_volume(semi_axes.len()) * semi_axes.iter().product::<f64>())
        }
        BodyDescriptor::Cuboid { half_sides, .. } => Some(half_sides.iter().map(|h| 2.0 * h).product()),
        BodyDescriptor::CrossPolytope { n, a } => {
            let fact: f64 = (1..=*n).map(|i| i as f64).product();
            Some((2.0 * a).powi(*n as i32) / fact)
        }
        BodyDescriptor::Cylinder { n, r, h } => Some(ball_volume(n - 1) * r.powi(*n as i32 - 1) * 2.0 * h),
        _ => None,
    }
}

/// `λ_{n-1}(K ∩ u⊥)`.
pub fn section_volume<B: RadialFunction + ?Sized>(body: &B, u: &Direction, settings: &Settings) -> Result<f64> {
    check_dim(body.dim(), u)?;
    Ok(SubsphereIntegral::new(body.dim(), settings)?.section(body, u.as_slice()))
}

/// `(Rg)(u) = ∫_{S^{n-1} ∩ u⊥} g`.
pub fn radon_transform(g: impl Fn(&[f64]) -> f64, u: &Direction, settings: &Settings) -> Result<f64> {
    Ok(SubsphereIntegral::new(u.dim(), settings)?.integrate(u.as_slice(), g))
}

fn check_dim(n: usize, u: &Direction) -> Result<()> {
    if u.dim() != n {
        return Err(GeoError::DimensionMismatch { expected: n, got: u.dim() });
    }
    Ok(())
}

/// Section volumes of one body over a list of directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionTable {
    pub directions: Vec<Direction>,
    pub values: Vec<f64>,
    /// Monte Carlo standard errors; absent for deterministic rules.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
}

impl SectionTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with header `u_1,...,u_n,section_volume`.
    pub fn to_csv(&self) -> String {
        let n = self.directions.first().map_or(0, Direction::dim);
        let mut out = String::new();
        for i in 1..=n {
            let _ = write!(out, "u_{i},");
        }
        out.push_str("section_volume\n");
        for (u, v) in self.directions.iter().zip(&self.values) {
            for c in u.as_slice() {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

/// Sections of `body` along every direction in `dirs`.
pub fn section_table<B: RadialFunction + ?Sized>(
    body: &B,
    dirs: &[Direction],
    settings: &Settings,
) -> Result<SectionTable> {
    for u in dirs {
        check_dim(body.dim(), u)?;
    }
    let rule = SubsphereIntegral::new(body.dim(), settings)?;
    let est: Vec<(f64, f64)> = dirs.par_iter().map(|u| rule.section_estimate(body, u.as_slice())).collect();
    Ok(SectionTable {
        directions: dirs.to_vec(),
        values: est.iter().map(|e| e.0).collect(),
        std_errors: (!rule.is_exact()).then(|| est.iter().map(|e| e.1).collect()),
    })
}

/// The intersection body `IM` tabulated on the requested directions; the only
/// form offered when `n > 3`.
pub fn intersection_table(m: &StarBody, dirs: &[Direction], settings: &Settings) -> Result<SectionTable> {
    section_table(m, dirs, settings)
}

/// Radial function `u ↦ λ_{n-1}(M ∩ u⊥)` evaluated on demand.
#[derive(Debug, Clone)]
pub struct IntersectionBody<B> {
    body: B,
    rule: SubsphereIntegral,
}

impl<B: RadialFunction> IntersectionBody<B> {
    pub fn new(body: B, settings: &Settings) -> Result<Self> {
        let rule = SubsphereIntegral::new(body.dim(), settings)?;
        Ok(IntersectionBody { body, rule })
    }

    pub fn with_rule(body: B, rule: SubsphereIntegral) -> Result<Self> {
        if rule.dim() != body.dim() {
            return Err(GeoError::DimensionMismatch { expected: body.dim(), got: rule.dim() });
        }
        Ok(IntersectionBody { body, rule })
    }

    pub fn inner(&self) -> &B {
        &self.body
    }
}

impl<B: RadialFunction> RadialFunction for IntersectionBody<B> {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn radial(&self, u: &[f64]) -> f64 {
        self.rule.section(&self.body, u)
    }

    fn smoothness(&self) -> Smoothness {
        self.body.smoothness()
    }
}

/// `IM` for a body in E³ as a `sampled` body on the
/// `settings.sphere_lat × 2·settings.sphere_lat` grid.
pub fn intersection_body_of(m: &StarBody, settings: &Settings) -> Result<StarBody> {
    if m.dim() != 3 {
        return Err(GeoError::unsupported(format!(
            "intersection bodies are tabulated on S² only; use intersection_table in R^{}",
            m.dim()
        )));
    }
    let view = IntersectionBody::new(m, settings)?;
    tabulate(&view, settings.sphere_lat, 2 * settings.sphere_lat)
}
