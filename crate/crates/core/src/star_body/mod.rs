//! Centered star bodies described by their radial functions.
//!
//! A [`BodyDescriptor`] is plain data; [`StarBody::new`] validates it and
//! precomputes whatever evaluation needs (harmonic spectra, splines, grids).
//! Everything downstream only sees the [`RadialFunction`] trait.

mod descriptor;
mod interp;

pub use descriptor::{parse_descriptor, serialize, BodyDescriptor, HarmonicTerm, PolarProfile, Smoothness};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{GeoError, Result};
use crate::sphere_quad::{dot, norm, Direction, HarmonicSpectrum, Householder, SphereGrid};
use interp::{CubicSpline, SampledGrid};

/// Step of the central difference used for `∂ρ/∂φ` when no closed form exists.
pub const DPHI_STEP: f64 = 1e-5;

/// A radial function `u ↦ ρ(u)` on `S^{n-1}`.
///
/// `radial` takes a unit vector of length `dim()` and does not check it.
pub trait RadialFunction: Sync {
    fn dim(&self) -> usize;

    fn radial(&self, u: &[f64]) -> f64;

    fn smoothness(&self) -> Smoothness {
        Smoothness::C0
    }

    /// Closed-form `∂ρ/∂φ` in the given frame, if the body has one.
    fn dphi_analytic(&self, _frame: &PoleFrame, _theta: f64, _phi: f64) -> Option<f64> {
        None
    }
}

impl<T: RadialFunction + ?Sized> RadialFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn radial(&self, u: &[f64]) -> f64 {
        (**self).radial(u)
    }
    fn smoothness(&self) -> Smoothness {
        (**self).smoothness()
    }
    fn dphi_analytic(&self, frame: &PoleFrame, theta: f64, phi: f64) -> Option<f64> {
        (**self).dphi_analytic(frame, theta, phi)
    }
}

/// Spherical coordinates on S² about a pole: `φ` is measured from the pole,
/// `θ` from the first frame vector towards the second.
#[derive(Debug, Clone)]
pub struct PoleFrame {
    pole: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl PoleFrame {
    pub fn new(pole: &Direction) -> Result<Self> {
        if pole.dim() != 3 {
            return Err(GeoError::DimensionMismatch { expected: 3, got: pole.dim() });
        }
        let h = Householder::new(pole.as_slice());
        let c1 = h.column(1);
        let c2 = h.column(2);
        let p = pole.as_slice();
        Ok(PoleFrame { pole: [p[0], p[1], p[2]], e1: [c1[0], c1[1], c1[2]], e2: [c2[0], c2[1], c2[2]] })
    }

    pub fn pole(&self) -> [f64; 3] {
        self.pole
    }

    pub fn basis(&self) -> ([f64; 3], [f64; 3]) {
        (self.e1, self.e2)
    }

    /// Unit vector at `(θ, φ)`; valid for any real `φ`.
    #[inline]
    pub fn direction(&self, theta: f64, phi: f64) -> [f64; 3] {
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        std::array::from_fn(|i| sp * (ct * self.e1[i] + st * self.e2[i]) + cp * self.pole[i])
    }

    /// `∂u/∂φ` at `(θ, φ)`.
    #[inline]
    pub fn d_direction_dphi(&self, theta: f64, phi: f64) -> [f64; 3] {
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        std::array::from_fn(|i| cp * (ct * self.e1[i] + st * self.e2[i]) - sp * self.pole[i])
    }

    /// `(θ, φ)` of a unit vector, `θ ∈ (-π, π]`.
    pub fn angles(&self, u: &[f64]) -> (f64, f64) {
        let z = dot(u, &self.pole).clamp(-1.0, 1.0);
        let x = dot(u, &self.e1);
        let y = dot(u, &self.e2);
        (y.atan2(x), z.acos())
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Ball { r: f64 },
    Ellipsoid { inv_sq: Vec<f64> },
    Cuboid { half: Vec<f64> },
    CrossPolytope { a: f64 },
    Cylinder { r: f64, h: f64 },
    Revolution { axis: [f64; 3], spline: CubicSpline, smoothness: Smoothness },
    Perturbed { r0: f64, spectrum: HarmonicSpectrum },
    Sampled(SampledGrid),
}

/// A validated body ready for evaluation.
#[derive(Debug, Clone)]
pub struct StarBody {
    desc: BodyDescriptor,
    n: usize,
    kind: Kind,
}

impl StarBody {
    pub fn new(desc: BodyDescriptor) -> Result<Self> {
        desc.check()?;
        let n = desc.dim();
        let kind = match &desc {
            BodyDescriptor::Ball { r, .. } => Kind::Ball { r: *r },
            BodyDescriptor::Ellipsoid { semi_axes } => {
                Kind::Ellipsoid { inv_sq: semi_axes.iter().map(|a| 1.0 / (a * a)).collect() }
            }
            BodyDescriptor::Cuboid { half_sides, .. } => Kind::Cuboid { half: half_sides.clone() },
            BodyDescriptor::CrossPolytope { a, .. } => Kind::CrossPolytope { a: *a },
            BodyDescriptor::Cylinder { r, h, .. } => Kind::Cylinder { r: *r, h: *h },
            BodyDescriptor::Revolution { axis, profile, smoothness } => {
                let len = norm(axis);
                Kind::Revolution {
                    axis: axis.map(|c| c / len),
                    spline: CubicSpline::clamped(&profile.phi, &profile.rho, 0.0, 0.0),
                    smoothness: *smoothness,
                }
            }
            BodyDescriptor::PerturbedBall { r0, amplitude, coeffs } => {
                let terms: Vec<_> = coeffs.iter().map(|t| (t.l, t.m, amplitude * t.c)).collect();
                let spectrum = HarmonicSpectrum::from_terms(&terms)?;
                let body = Kind::Perturbed { r0: *r0, spectrum };
                let lmax = coeffs.iter().map(|t| t.l).max().unwrap_or(0);
                let lat = (lmax + 2).max(16);
                let grid = SphereGrid::new(lat, 2 * lat)?;
                let probe = StarBody { desc: desc.clone(), n: 3, kind: body };
                let min = (0..grid.len()).map(|k| probe.radial(&grid.node(k))).fold(f64::INFINITY, f64::min);
                if min < 0.1 * r0 {
                    return Err(GeoError::invalid(format!(
                        "perturbed ball radius drops to {min:.4} < 0.1·r0"
                    )));
                }
                probe.kind
            }
            BodyDescriptor::Sampled { n_phi, n_theta, values, interpolation_order, .. } => {
                let grid = SampledGrid {
                    n_phi: *n_phi,
                    n_theta: *n_theta,
                    values: values.clone(),
                    cubic: *interpolation_order == 3,
                };
                let scale = values.iter().cloned().fold(0.0, f64::max).max(1.0);
                let defect = grid.evenness_defect();
                if defect > 1e-9 * scale {
                    return Err(GeoError::invalid(format!("sampled body is not even (defect {defect:e})")));
                }
                Kind::Sampled(grid)
            }
        };
        Ok(StarBody { desc, n, kind })
    }

    /// Parses and validates a JSON descriptor.
    pub fn parse(text: &str) -> Result<Self> {
        let desc = parse_descriptor(text)?;
        StarBody::new(desc).map_err(|e| match e {
            GeoError::InvalidParameter(message) => GeoError::Parse { path: String::new(), message },
            other => other,
        })
    }

    pub fn descriptor(&self) -> &BodyDescriptor {
        &self.desc
    }

    pub fn to_json(&self) -> String {
        serialize(&self.desc)
    }

    /// `s·K`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        StarBody::new(self.desc.scaled(s)?)
    }

    /// True for the variants that are convex by construction.
    pub fn is_convex_by_construction(&self) -> bool {
        matches!(
            self.kind,
            Kind::Ball { .. } | Kind::Ellipsoid { .. } | Kind::Cuboid { .. } | Kind::CrossPolytope { .. } | Kind::Cylinder { .. }
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        contains(self, x)
    }
}

impl RadialFunction for StarBody {
    fn dim(&self) -> usize {
        self.n
    }

    fn radial(&self, u: &[f64]) -> f64 {
        match &self.kind {
            Kind::Ball { r } => *r,
            Kind::Ellipsoid { inv_sq } => {
                let q: f64 = u.iter().zip(inv_sq).map(|(x, k)| x * x * k).sum();
                1.0 / q.sqrt()
            }
            Kind::Cuboid { half } => u
                .iter()
                .zip(half)
                .map(|(x, h)| h / x.abs())
                .fold(f64::INFINITY, f64::min),
            Kind::CrossPolytope { a } => a / u.iter().map(|x| x.abs()).sum::<f64>(),
            Kind::Cylinder { r, h } => {
                let (perp, axial) = u.split_at(self.n - 1);
                (r / norm(perp)).min(h / axial[0].abs())
            }
            Kind::Revolution { axis, spline, .. } => {
                let folded = dot(u, axis).abs().min(1.0).acos();
                spline.eval(folded).0
            }
            Kind::Perturbed { r0, spectrum } => r0 + spectrum.evaluate(u),
            Kind::Sampled(grid) => grid.eval(u),
        }
    }

    fn smoothness(&self) -> Smoothness {
        match &self.kind {
            Kind::Ball { .. } | Kind::Ellipsoid { .. } | Kind::Perturbed { .. } => Smoothness::Smooth,
            Kind::Cuboid { .. } | Kind::CrossPolytope { .. } | Kind::Cylinder { .. } => Smoothness::C0,
            Kind::Revolution { smoothness, .. } => *smoothness,
            Kind::Sampled(grid) => {
                if grid.cubic {
                    Smoothness::C1
                } else {
                    Smoothness::C0
                }
            }
        }
    }

    fn dphi_analytic(&self, frame: &PoleFrame, theta: f64, phi: f64) -> Option<f64> {
        match &self.kind {
            Kind::Ball { .. } => Some(0.0),
            Kind::Ellipsoid { inv_sq } => {
                let u = frame.direction(theta, phi);
                let du = frame.d_direction_dphi(theta, phi);
                let mut q = 0.0;
                let mut dq = 0.0;
                for i in 0..3 {
                    q += u[i] * u[i] * inv_sq[i];
                    dq += u[i] * du[i] * inv_sq[i];
                }
                Some(-dq / (q * q.sqrt()))
            }
            Kind::Revolution { axis, spline, .. } => {
                let c = dot(&frame.pole(), axis);
                if (c.abs() - 1.0).abs() > 1e-12 {
                    return None;
                }
                // Angle from the axis, and its derivative with respect to φ.
                let (psi, dpsi) = if c > 0.0 { (phi, 1.0) } else { (PI - phi, -1.0) };
                let (folded, dfold) = if psi <= FRAC_PI_2 { (psi, 1.0) } else { (PI - psi, -1.0) };
                Some(spline.eval(folded).1 * dfold * dpsi)
            }
            _ => None,
        }
    }
}

/// Tabulates `body` on the cell-centred grid of a `sampled` descriptor with
/// bicubic interpolation. Only the northern half is evaluated and the rest is
/// its antipodal mirror, so the table is exactly even.
pub fn tabulate<B: RadialFunction + ?Sized>(body: &B, n_phi: usize, n_theta: usize) -> Result<StarBody> {
    use rayon::prelude::*;
    if body.dim() != 3 {
        return Err(GeoError::DimensionMismatch { expected: 3, got: body.dim() });
    }
    if n_phi < 4 || n_theta < 4 || n_theta % 2 == 1 {
        return Err(GeoError::invalid(format!("cannot tabulate on a {n_phi}x{n_theta} grid")));
    }
    let grid = SampledGrid { n_phi, n_theta, values: Vec::new(), cubic: true };
    let half = n_phi.div_ceil(2);
    let rows: Vec<Vec<f64>> = (0..half)
        .into_par_iter()
        .map(|i| (0..n_theta).map(|j| body.radial(&grid.node(i, j))).collect())
        .collect();
    let mut values = vec![0.0; n_phi * n_theta];
    for (i, row) in rows.iter().enumerate() {
        let mirror = n_phi - 1 - i;
        for j in 0..n_theta {
            let jm = (j + n_theta / 2) % n_theta;
            if mirror == i {
                values[i * n_theta + j] = if j < n_theta / 2 { row[j] } else { row[jm] };
            } else {
                values[i * n_theta + j] = row[j];
                values[mirror * n_theta + jm] = row[j];
            }
        }
    }
    StarBody::new(BodyDescriptor::Sampled { n: 3, n_phi, n_theta, values, interpolation_order: 3 })
}

/// `ρ_K(u)` with the dimension check.
pub fn radial(body: &StarBody, u: &Direction) -> Result<f64> {
    if u.dim() != body.dim() {
        return Err(GeoError::invalid(format!(
            "direction in R^{} for a body in R^{}",
            u.dim(),
            body.dim()
        )));
    }
    Ok(body.radial(u.as_slice()))
}

/// Relative allowance for rounding when a point is built as `ρ(u)·u`.
const BOUNDARY_ULPS: f64 = 1e-12;

/// Membership `‖x‖ <= ρ(x / ‖x‖)` up to a relative `1e-12`; the origin is
/// always inside.
pub fn contains<B: RadialFunction + ?Sized>(body: &B, x: &[f64]) -> bool {
    debug_assert_eq!(x.len(), body.dim());
    let r = norm(x);
    if r == 0.0 {
        return true;
    }
    let u: Vec<f64> = x.iter().map(|c| c / r).collect();
    r <= body.radial(&u) * (1.0 + BOUNDARY_ULPS)
}

/// `∂ρ/∂φ` at `(θ, φ)` in `frame`: closed form when the body provides one,
/// otherwise a central difference with step [`DPHI_STEP`].
pub fn radial_dphi<B: RadialFunction + ?Sized>(
    body: &B,
    frame: &PoleFrame,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    if body.dim() != 3 {
        return Err(GeoError::DimensionMismatch { expected: 3, got: body.dim() });
    }
    if body.smoothness() < Smoothness::C1 {
        return Err(GeoError::unsupported(format!(
            "latitude derivative needs a C1 radial function, body is {:?}",
            body.smoothness()
        )));
    }
    if !(0.0..=PI).contains(&phi) {
        return Err(GeoError::invalid(format!("phi = {phi} outside [0, pi]")));
    }
    Ok(dphi_unchecked(body, frame, theta, phi))
}

#[inline]
pub(crate) fn dphi_unchecked<B: RadialFunction + ?Sized>(body: &B, frame: &PoleFrame, theta: f64, phi: f64) -> f64 {
    body.dphi_analytic(frame, theta, phi).unwrap_or_else(|| {
        let hi = body.radial(&frame.direction(theta, phi + DPHI_STEP));
        let lo = body.radial(&frame.direction(theta, phi - DPHI_STEP));
        (hi - lo) / (2.0 * DPHI_STEP)
    })
}

/// Outcome of a midpoint convexity probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Pass { trials: usize },
    /// `p`, `q` are boundary points whose midpoint lies outside the body;
    /// `excess` is `‖m‖ / ρ(m/‖m‖) - 1`.
    Fail { p: Vec<f64>, q: Vec<f64>, excess: f64 },
}

impl ProbeOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ProbeOutcome::Pass { .. })
    }
}

/// Relative slack of the midpoint test; flat faces put midpoints exactly on
/// the boundary.
const PROBE_SLACK: f64 = 1e-9;

/// Samples pairs of boundary points and checks that their midpoints are in
/// the body. Odd trials pair a direction with a nearby one (angular offsets
/// between ~3e-3 and 0.5 rad) so local concavities are found as well as
/// global ones.
pub fn convexity_probe<B: RadialFunction + ?Sized>(body: &B, trials: usize, seed: u64) -> ProbeOutcome {
    let n = body.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let r = norm(&v);
            if r > 1e-12 {
                return v.into_iter().map(|c| c / r).collect();
            }
        }
    };
    for t in 0..trials {
        let u = gaussian(&mut rng);
        let v = if t % 2 == 0 {
            gaussian(&mut rng)
        } else {
            let step = 10f64.powf(rng.gen_range(-2.5..-0.3));
            let mut d = gaussian(&mut rng);
            let along = dot(&d, &u);
            d.iter_mut().zip(&u).for_each(|(di, ui)| *di -= along * ui);
            let dn = norm(&d);
            if dn < 1e-12 {
                continue;
            }
            let w: Vec<f64> = u.iter().zip(&d).map(|(ui, di)| ui + step * di / dn).collect();
            let wn = norm(&w);
            w.into_iter().map(|c| c / wn).collect()
        };
        let p: Vec<f64> = u.iter().map(|c| c * body.radial(&u)).collect();
        let q: Vec<f64> = v.iter().map(|c| c * body.radial(&v)).collect();
        let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = norm(&m);
        let scale = norm(&p).max(norm(&q));
        if r <= 1e-12 * scale {
            continue;
        }
        let dir: Vec<f64> = m.iter().map(|c| c / r).collect();
        let excess = r / body.radial(&dir) - 1.0;
        if excess > PROBE_SLACK {
            return ProbeOutcome::Fail { p, q, excess };
        }
    }
    ProbeOutcome::Pass { trials }
}
