//! Schwarz symmetrization about an axis in E³.
//!
//! Each slice of `K` orthogonal to the axis is replaced by the centred disk
//! of the same area. Slice areas are measured by ray bisection on the
//! membership test, first around the point of the slice on the segment
//! joining the two support points of `K` in the axis direction, then around
//! the centroid of that first estimate. The area function `A(z)`
//! is even and smooth in `z²`, so it is stored as a Chebyshev series in
//! `w = 2(z/z_max)² - 1`; radii are `r = (A/π)^{1/2}`.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{GeoError, Result};
use crate::radon::{funk_invert_eq1, Eq1Params};
use crate::sphere_quad::{dot, norm, Direction, Householder, SphereGrid};
use crate::star_body::{
    contains, convexity_probe, BodyDescriptor, PolarProfile, PoleFrame, ProbeOutcome, RadialFunction, Smoothness,
};

/// Trials used when certifying convexity.
pub const PROBE_TRIALS: usize = 10_000;
/// Default number of heights of a symmetral profile.
pub const DEFAULT_GRID: usize = 96;
/// Rays per slice.
const RAYS: usize = 256;

/// A body that passed [`convexity_probe`].
#[derive(Debug, Clone)]
pub struct ConvexBody<B> {
    body: B,
}

impl<B: RadialFunction> ConvexBody<B> {
    pub fn certify(body: B, trials: usize, seed: u64) -> Result<Self> {
        match convexity_probe(&body, trials, seed) {
            ProbeOutcome::Pass { .. } => Ok(ConvexBody { body }),
            ProbeOutcome::Fail { excess, .. } => Err(GeoError::unsupported(format!(
                "body failed the convexity probe (midpoint outside by {excess:e})"
            ))),
        }
    }

    pub fn inner(&self) -> &B {
        &self.body
    }
}

impl<B: RadialFunction> RadialFunction for ConvexBody<B> {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn radial(&self, u: &[f64]) -> f64 {
        self.body.radial(u)
    }
    fn smoothness(&self) -> Smoothness {
        self.body.smoothness()
    }
    fn dphi_analytic(&self, frame: &PoleFrame, theta: f64, phi: f64) -> Option<f64> {
        self.body.dphi_analytic(frame, theta, phi)
    }
}

/// Slicing geometry of one body along one axis.
struct Slicer<'a, B> {
    body: &'a B,
    e1: [f64; 3],
    e2: [f64; 3],
    z_max: f64,
    top: [f64; 3],
    reach: f64,
}

impl<'a, B: RadialFunction> Slicer<'a, B> {
    fn new(body: &'a B, axis: &Direction) -> Result<Self> {
        if body.dim() != 3 || axis.dim() != 3 {
            return Err(GeoError::DimensionMismatch { expected: 3, got: body.dim().max(axis.dim()) });
        }
        let h = Householder::new(axis.as_slice());
        let (c1, c2) = (h.column(1), h.column(2));
        let frame = PoleFrame::new(axis)?;
        let (z_max, top, rho_max) = support(body, &frame);
        Ok(Slicer {
            body,
            e1: [c1[0], c1[1], c1[2]],
            e2: [c2[0], c2[1], c2[2]],
            z_max,
            top,
            reach: 2.5 * rho_max,
        })
    }

    /// Distance from `p` to the boundary along the unit vector `w`.
    fn ray(&self, p: &[f64; 3], w: &[f64; 3]) -> f64 {
        let at = |r: f64| -> [f64; 3] { std::array::from_fn(|i| p[i] + r * w[i]) };
        let mut hi = self.reach;
        while contains(self.body, &at(hi)) {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        let tol = 1e-10 * self.reach;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if contains(self.body, &at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn area(&self, z: f64) -> f64 {
        if z.abs() >= self.z_max {
            return 0.0;
        }
        let mut p: [f64; 3] = self.top.map(|c| c * z / self.z_max);
        let (first, centroid) = self.polar_area(&p);
        // Recentre once at the centroid; the trapezoid rule is most accurate there.
        p = std::array::from_fn(|i| p[i] + centroid[0] * self.e1[i] + centroid[1] * self.e2[i]);
        let (second, _) = self.polar_area(&p);
        if second.is_finite() {
            second
        } else {
            first
        }
    }

    /// `½∫ r(ψ)² dψ` around `p` and the centroid offset `(1/A)∫ r³/3 (cos ψ, sin ψ) dψ`.
    fn polar_area(&self, p: &[f64; 3]) -> (f64, [f64; 2]) {
        let step = 2.0 * PI / RAYS as f64;
        let rays: Vec<(f64, f64, f64)> = (0..RAYS)
            .map(|k| {
                let (s, c) = (k as f64 * step).sin_cos();
                let w = std::array::from_fn(|i| c * self.e1[i] + s * self.e2[i]);
                (self.ray(p, &w), c, s)
            })
            .collect();
        let area = 0.5 * step * rays.iter().map(|(r, _, _)| r * r).sum::<f64>();
        if area <= 0.0 {
            return (0.0, [0.0; 2]);
        }
        let mx = rays.iter().map(|(r, c, _)| r.powi(3) * c).sum::<f64>();
        let my = rays.iter().map(|(r, _, s)| r.powi(3) * s).sum::<f64>();
        let k = step / (3.0 * area);
        (area, [k * mx, k * my])
    }
}

/// Support height `max ⟨x, axis⟩` over the body, a point attaining it, and the
/// largest radius seen on the way.
fn support<B: RadialFunction + ?Sized>(body: &B, frame: &PoleFrame) -> (f64, [f64; 3], f64) {
    let height = |u: &[f64; 3]| body.radial(u) * dot(u, &frame.pole());
    let (mut best, mut best_u) = (f64::NEG_INFINITY, frame.pole());
    let mut rho_max: f64 = 0.0;
    let grid = SphereGrid::new(24, 48).expect("fixed grid");
    for k in 0..grid.len() {
        let u = grid.node(k);
        let u = frame_to_world(frame, &u);
        rho_max = rho_max.max(body.radial(&u));
        let h = height(&u);
        if h > best {
            best = h;
            best_u = u;
        }
    }
    // Compass search on the sphere around the best node.
    let mut step = 0.1;
    while step > 1e-11 {
        let hh = Householder::new(&best_u);
        let (t1, t2) = (hh.column(1), hh.column(2));
        let mut moved = false;
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let v: [f64; 3] = std::array::from_fn(|i| best_u[i] + step * (a * t1[i] + b * t2[i]));
            let n = norm(&v);
            let v = v.map(|c| c / n);
            let h = height(&v);
            if h > best {
                best = h;
                best_u = v;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let r = body.radial(&best_u);
    (best, best_u.map(|c| c * r), rho_max.max(r))
}

fn frame_to_world(frame: &PoleFrame, v: &[f64; 3]) -> [f64; 3] {
    let (e1, e2) = frame.basis();
    let p = frame.pole();
    std::array::from_fn(|i| v[0] * e1[i] + v[1] * e2[i] + v[2] * p[i])
}

/// Area of the slice `{x ∈ K : ⟨x, axis⟩ = z}`; zero outside the extent of `K`.
pub fn slice_area<B: RadialFunction>(body: &ConvexBody<B>, axis: &Direction, z: f64) -> Result<f64> {
    Ok(Slicer::new(body.inner(), axis)?.area(z))
}

/// Chebyshev series of `A` in `w = 2(z/z_max)² - 1` and of `dA/dw`.
#[derive(Debug, Clone, PartialEq)]
struct AreaSeries {
    a: Vec<f64>,
    da: Vec<f64>,
    /// Largest sampled area; values below `1e-10 · scale` are taken as zero.
    scale: f64,
}

impl AreaSeries {
    /// From samples at the Chebyshev–Gauss nodes `w_j = cos((j + ½)π/M)`.
    fn from_samples(samples: &[f64]) -> Self {
        let m = samples.len();
        let mut a: Vec<f64> = (0..m)
            .map(|k| {
                let s: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (k as f64 * (j as f64 + 0.5) * PI / m as f64).cos())
                    .sum();
                2.0 * s / m as f64
            })
            .collect();
        a[0] *= 0.5;
        let mut d = vec![0.0; m + 1];
        for k in (1..m).rev() {
            d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * a[k];
        }
        d.truncate(m.max(1));
        d[0] *= 0.5;
        let scale = samples.iter().fold(0.0, |m: f64, v| m.max(*v));
        AreaSeries { a, da: d, scale }
    }

    fn clenshaw(c: &[f64], w: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * w * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + w * b1 - b2
    }
}

/// A body of revolution given by its radius profile `r(z)` about an axis.
#[derive(Debug, Clone, Serialize)]
pub struct RevolutionProfile {
    pub axis: Direction,
    pub z_max: f64,
    /// Ascending heights spanning `[-z_max, z_max]`.
    pub heights: Vec<f64>,
    pub radii: Vec<f64>,
    pub interpolation: &'static str,
    #[serde(skip)]
    series: AreaSeries,
    #[serde(skip)]
    reach: f64,
}

impl RevolutionProfile {
    fn from_series(axis: Direction, z_max: f64, series: AreaSeries, nodes: &[f64]) -> Self {
        let mut p = RevolutionProfile {
            axis,
            z_max,
            heights: Vec::new(),
            radii: Vec::new(),
            interpolation: "chebyshev_area",
            series,
            reach: 0.0,
        };
        let mut heights: Vec<f64> = nodes.iter().flat_map(|z| [-z, *z]).collect();
        heights.extend([-z_max, z_max]);
        heights.sort_by(f64::total_cmp);
        p.radii = heights.iter().map(|z| p.radius(*z)).collect();
        p.heights = heights;
        p.reach = z_max.hypot(p.radius(0.0));
        p
    }

    fn w(&self, z: f64) -> f64 {
        let t = z / self.z_max;
        2.0 * t * t - 1.0
    }

    /// Slice area `A(z)`.
    pub fn area(&self, z: f64) -> f64 {
        if z.abs() > self.z_max {
            return 0.0;
        }
        let a = AreaSeries::clenshaw(&self.series.a, self.w(z));
        if a < 1e-10 * self.series.scale {
            0.0
        } else {
            a
        }
    }

    /// `r(z) = (A(z)/π)^{1/2}`.
    pub fn radius(&self, z: f64) -> f64 {
        (self.area(z) / PI).sqrt()
    }

    /// `r'(z) = A'(z) / (2π r(z))`.
    pub fn radius_derivative(&self, z: f64) -> f64 {
        let da = AreaSeries::clenshaw(&self.series.da, self.w(z)) * 4.0 * z / (self.z_max * self.z_max);
        da / (2.0 * PI * self.radius(z))
    }

    /// Radial function at angle `ψ ∈ [0, π/2]` from the axis: the root of
    /// `c sin ψ = r(c cos ψ)`, by bisection.
    pub fn radial_at_angle(&self, psi: f64) -> f64 {
        let (s, c) = psi.sin_cos();
        let inside = |t: f64| t * c <= self.z_max && t * s <= self.radius(t * c);
        let (mut lo, mut hi) = (0.0, self.reach * (1.0 + 1e-9));
        if inside(hi) {
            return hi;
        }
        while hi - lo > 1e-15 * self.reach {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `dρ/dψ` at angle `ψ ∈ [0, π/2]` from the axis.
    fn radial_dpsi(&self, psi: f64) -> f64 {
        let rho = self.radial_at_angle(psi);
        let (s, c) = psi.sin_cos();
        let z = rho * c;
        let r = self.radius(z);
        // On a flat cap the boundary is z = z_max, so ρ = z_max / cos ψ.
        if z >= self.z_max * (1.0 - 1e-12) || r <= 1e-12 * self.reach {
            return rho * s / c;
        }
        let dr = self.radius_derivative(z);
        (dr * rho * s + rho * c) / (dr * c - s)
    }

    /// CSV with header `z,r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,r\n");
        for (z, r) in self.heights.iter().zip(&self.radii) {
            let _ = writeln!(out, "{z},{r}");
        }
        out
    }

    /// A `revolution` descriptor tabulating `ρ(ψ)` at `samples` angles.
    pub fn to_descriptor(&self, samples: usize) -> Result<BodyDescriptor> {
        if samples < 2 {
            return Err(GeoError::invalid("need at least two profile samples"));
        }
        let phi: Vec<f64> = (0..samples).map(|i| FRAC_PI_2 * i as f64 / (samples - 1) as f64).collect();
        let rho = phi.iter().map(|p| self.radial_at_angle(*p)).collect();
        let a = self.axis.as_slice();
        Ok(BodyDescriptor::Revolution {
            axis: [a[0], a[1], a[2]],
            profile: PolarProfile { phi, rho },
            smoothness: Smoothness::C1,
        })
    }
}

/// `ρ_{K̄}(u)`.
pub fn revolution_radial(profile: &RevolutionProfile, u: &[f64]) -> f64 {
    let psi = dot(u, profile.axis.as_slice()).abs().min(1.0).acos();
    profile.radial_at_angle(psi)
}

impl RadialFunction for RevolutionProfile {
    fn dim(&self) -> usize {
        3
    }

    fn radial(&self, u: &[f64]) -> f64 {
        revolution_radial(self, u)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C1
    }

    fn dphi_analytic(&self, frame: &PoleFrame, _theta: f64, phi: f64) -> Option<f64> {
        let c = dot(&frame.pole(), self.axis.as_slice());
        if (c.abs() - 1.0).abs() > 1e-12 {
            return None;
        }
        let (psi, dpsi) = if c > 0.0 { (phi, 1.0) } else { (PI - phi, -1.0) };
        let (folded, dfold) = if psi <= FRAC_PI_2 { (psi, 1.0) } else { (PI - psi, -1.0) };
        Some(self.radial_dpsi(folded) * dfold * dpsi)
    }
}

/// The Schwarz symmetral of `K` about `axis`, sampled at `grid_size`
/// heights (rounded up to even) clustered towards `±z_max`.
pub fn schwarz_symmetral<B: RadialFunction>(
    body: &ConvexBody<B>,
    axis: &Direction,
    grid_size: usize,
) -> Result<RevolutionProfile> {
    if grid_size < 33 {
        return Err(GeoError::invalid(format!("symmetral grid needs >= 33 heights, got {grid_size}")));
    }
    let slicer = Slicer::new(body.inner(), axis)?;
    let m = grid_size.div_ceil(2);
    // Positive heights z_j = z_max cos θ_j map to the Gauss nodes in w.
    let nodes: Vec<f64> = (0..m)
        .map(|j| slicer.z_max * ((2 * j + 1) as f64 * PI / (4 * m) as f64).cos())
        .collect();
    let areas: Vec<f64> = nodes.par_iter().map(|z| slicer.area(*z)).collect();
    Ok(RevolutionProfile::from_series(
        axis.clone(),
        slicer.z_max,
        AreaSeries::from_samples(&areas),
        &nodes,
    ))
}

/// `g(u₀)` for `K` and for its symmetral about `u₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceGap {
    pub g: f64,
    pub g_bar: f64,
    pub gap: f64,
}

/// `|g(u₀) - ḡ(u₀)|`, both from the latitude-derivative formula.
pub fn symmetral_invariance_gap<B: RadialFunction>(body: &ConvexBody<B>, u0: &Direction) -> Result<InvarianceGap> {
    let params = Eq1Params::default();
    let g = funk_invert_eq1(body, u0, &params)?;
    let bar = schwarz_symmetral(body, u0, DEFAULT_GRID)?;
    let g_bar = funk_invert_eq1(&bar, u0, &params)?;
    Ok(InvarianceGap { g, g_bar, gap: (g - g_bar).abs() })
}
