use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use crate::error::{GeoError, Result};
use crate::settings::Settings;
use crate::sphere_quad::{analyze, gauss_legendre_on, legendre_at_zero, synthesize_grid, Direction, HarmonicSpectrum, SphereGrid, MAX_DEGREE};
use crate::star_body::{dphi_unchecked, tabulate, PoleFrame, RadialFunction, Smoothness, StarBody};

/// Inversion route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Abel,
    Eq1,
    Harmonic,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Abel => "abel",
            Method::Eq1 => "eq1",
            Method::Harmonic => "harmonic",
        })
    }
}

impl FromStr for Method {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abel" => Ok(Method::Abel),
            "eq1" => Ok(Method::Eq1),
            "harmonic" => Ok(Method::Harmonic),
            other => Err(GeoError::invalid(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolation_residual: Option<f64>,
    /// Largest odd-degree coefficient of the input that was discarded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped_odd: Option<f64>,
}

/// Values of `g = R⁻¹ρ` at a list of directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionResult {
    pub method: Method,
    pub directions: Vec<[f64; 3]>,
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub spectrum: Option<HarmonicSpectrum>,
}

impl InversionResult {
    /// `g(u)` anywhere on S², available for the harmonic route.
    pub fn evaluate(&self, u: &[f64]) -> Option<f64> {
        self.spectrum.as_ref().map(|s| s.evaluate(u))
    }
}

fn require_smooth<B: RadialFunction + ?Sized>(body: &B) -> Result<()> {
    if body.dim() != 3 {
        return Err(GeoError::unsupported(format!("inversion is implemented on S² only, body is in R^{}", body.dim())));
    }
    if body.smoothness() < Smoothness::C1 {
        return Err(GeoError::unsupported(format!(
            "inversion needs a C1 radial function, body is {:?}",
            body.smoothness()
        )));
    }
    Ok(())
}

/// `A_K(φ)`, the mean of `ρ_K` over the circle at angle `φ` from the pole,
/// by the periodic trapezoid with `nodes` points.
pub fn latitude_average<B: RadialFunction + ?Sized>(body: &B, frame: &PoleFrame, phi: f64, nodes: usize) -> Result<f64> {
    if body.dim() != 3 {
        return Err(GeoError::DimensionMismatch { expected: 3, got: body.dim() });
    }
    if !(0.0..=PI).contains(&phi) {
        return Err(GeoError::invalid(format!("phi = {phi} outside [0, pi]")));
    }
    if nodes < 4 {
        return Err(GeoError::invalid(format!("latitude average needs >= 4 nodes, got {nodes}")));
    }
    Ok(lat_avg(body, frame, phi, nodes))
}

fn lat_avg<B: RadialFunction + ?Sized>(body: &B, frame: &PoleFrame, phi: f64, nodes: usize) -> f64 {
    let step = 2.0 * PI / nodes as f64;
    (0..nodes).map(|k| body.radial(&frame.direction(k as f64 * step, phi))).sum::<f64>() / nodes as f64
}

/// Discretization of the Abel-type limit formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelParams {
    /// Trapezoid nodes of each latitude average.
    pub n_theta: usize,
    /// Gauss–Legendre nodes of the desingularized inner integral.
    pub n_s: usize,
    /// Central-difference step in `t`.
    pub eta: f64,
    /// Richardson levels, at `t = 1 - 2^{-k}` from `k = first_level`.
    pub levels: usize,
    pub first_level: i32,
    /// Largest accepted extrapolation residual relative to `ρ(u₀)/(2π)`.
    pub tol: f64,
}

impl Default for AbelParams {
    fn default() -> Self {
        AbelParams { n_theta: 256, n_s: 64, eta: 1e-5, levels: 5, first_level: 6, tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelResult {
    pub g: f64,
    pub residual: f64,
    /// `d/dt` of the inner integral at each `t` of the ladder.
    pub ladder: Vec<f64>,
}

/// `g(u₀)` from `2πg(u₀) = lim_{t→1⁻} d/dt ∫₀ᵗ x A(asin x) / √(t² − x²) dx`.
///
/// The substitution `x = t sin s` removes the endpoint singularity, the
/// derivative is a central difference and the limit a Richardson ladder.
pub fn funk_invert_abel<B: RadialFunction + ?Sized>(body: &B, u0: &Direction, params: &AbelParams) -> Result<AbelResult> {
    require_smooth(body)?;
    let frame = PoleFrame::new(u0)?;
    if params.levels < 2 || params.n_s < 2 || params.n_theta < 4 || !(params.eta > 0.0) {
        return Err(GeoError::invalid("degenerate Abel parameters"));
    }
    let (s_nodes, s_weights) = gauss_legendre_on(params.n_s, 0.0, FRAC_PI_2);
    let ts: Vec<f64> = (0..params.levels)
        .map(|i| 1.0 - 2f64.powi(-(params.first_level + i as i32)))
        .collect();
    if ts[params.levels - 1] + params.eta >= 1.0 {
        return Err(GeoError::invalid("Abel ladder steps past t = 1"));
    }
    let jobs: Vec<(f64, usize)> = ts
        .iter()
        .flat_map(|t| [t + params.eta, t - params.eta])
        .flat_map(|t| (0..params.n_s).map(move |i| (t, i)))
        .collect();
    let terms: Vec<f64> = jobs
        .par_iter()
        .map(|&(t, i)| {
            let x = t * s_nodes[i].sin();
            s_weights[i] * x * lat_avg(body, &frame, x.asin(), params.n_theta)
        })
        .collect();
    let big_f: Vec<f64> = terms.chunks_exact(params.n_s).map(|c| c.iter().sum()).collect();
    let ladder: Vec<f64> = big_f.chunks_exact(2).map(|p| (p[0] - p[1]) / (2.0 * params.eta)).collect();

    // Neville table in h = 1 - t, which halves from level to level.
    let mut table = vec![ladder.clone()];
    for j in 1..params.levels {
        let prev = &table[j - 1];
        let f = 2f64.powi(j as i32);
        table.push((1..prev.len()).map(|i| (f * prev[i] - prev[i - 1]) / (f - 1.0)).collect());
    }
    let last = table[params.levels - 1][0];
    let before = *table[params.levels - 2].last().expect("two entries");
    let residual = (last - before).abs() / (2.0 * PI);
    let scale = body.radial(u0.as_slice()) / (2.0 * PI);
    if residual > params.tol * scale {
        return Err(GeoError::NoConvergence {
            what: "Abel limit t -> 1".into(),
            residual,
            tol: params.tol * scale,
        });
    }
    Ok(AbelResult { g: last / (2.0 * PI), residual, ladder })
}

/// Quadrature of the latitude-derivative formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq1Params {
    /// Trapezoid nodes in `θ`, taken in antipodal pairs; must be even.
    pub n_theta: usize,
    /// Gauss–Legendre nodes in `φ ∈ [0, π/2]`.
    pub n_phi: usize,
}

impl Default for Eq1Params {
    fn default() -> Self {
        Eq1Params { n_theta: 128, n_phi: 64 }
    }
}

/// `g(u₀)` from
/// `2πg(u₀) = ρ(u₀) + (1/2π) ∫₀^{2π} ∫₀^{π/2} ∂ρ/∂φ · sec φ dφ dθ`.
///
/// The `θ` sum is taken over pairs `(θ, θ + π)`; for an even `ρ` the paired
/// derivative vanishes at the equator, so the quotient by `cos φ` is smooth
/// and Gauss–Legendre in `φ` converges spectrally.
pub fn funk_invert_eq1<B: RadialFunction + ?Sized>(body: &B, u0: &Direction, params: &Eq1Params) -> Result<f64> {
    require_smooth(body)?;
    if params.n_theta < 4 || params.n_theta % 2 == 1 || params.n_phi < 2 {
        return Err(GeoError::invalid("latitude-derivative rule needs an even n_theta >= 4 and n_phi >= 2"));
    }
    let frame = PoleFrame::new(u0)?;
    Ok(eq1_unchecked(body, &frame, params))
}

pub(crate) fn eq1_unchecked<B: RadialFunction + ?Sized>(body: &B, frame: &PoleFrame, params: &Eq1Params) -> f64 {
    let half = params.n_theta / 2;
    let (phis, weights) = gauss_legendre_on(params.n_phi, 0.0, FRAC_PI_2);
    let rows: Vec<f64> = (0..params.n_phi)
        .into_par_iter()
        .map(|i| {
            let phi = phis[i];
            let paired: f64 = (0..half)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / params.n_theta as f64;
                    dphi_unchecked(body, frame, theta, phi) + dphi_unchecked(body, frame, theta + PI, phi)
                })
                .sum();
            weights[i] * paired / phi.cos()
        })
        .collect();
    let integral = rows.iter().sum::<f64>() * 2.0 * PI / params.n_theta as f64;
    let rho0 = body.radial(&frame.pole());
    (rho0 + integral / (2.0 * PI)) / (2.0 * PI)
}

/// `g = R⁻¹ρ` from grid samples of `ρ`: each even degree is divided by the
/// multiplier `2π P_l(0)`.
pub fn harmonic_invert(grid: &SphereGrid, values: &[f64], max_degree: usize) -> Result<InversionResult> {
    if max_degree > MAX_DEGREE {
        return Err(GeoError::invalid(format!("truncation degree {max_degree} above {MAX_DEGREE}")));
    }
    let rho = analyze(grid, values, max_degree)?;
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let odd = rho.odd_magnitude();
    if odd > 1e-8 * scale {
        return Err(GeoError::NotEven { magnitude: odd });
    }
    let g = rho.scale_degrees(|l| if l % 2 == 0 { 1.0 / (2.0 * PI * legendre_at_zero(l)) } else { 0.0 });
    let g_values = synthesize_grid(&g, grid);
    Ok(InversionResult {
        method: Method::Harmonic,
        directions: (0..grid.len()).map(|k| grid.node(k)).collect(),
        values: g_values,
        diagnostics: Diagnostics { truncation_degree: Some(max_degree), dropped_odd: Some(odd), ..Default::default() },
        spectrum: Some(g),
    })
}

/// [`harmonic_invert`] of a body sampled on the settings' grid, truncated at
/// `max_degree` (default `sphere_lat - 1`).
pub fn harmonic_invert_body<B: RadialFunction + ?Sized>(
    body: &B,
    settings: &Settings,
    max_degree: Option<usize>,
) -> Result<InversionResult> {
    if body.dim() != 3 {
        return Err(GeoError::unsupported(format!("inversion is implemented on S² only, body is in R^{}", body.dim())));
    }
    let grid = settings.sphere_grid()?;
    let values = grid.sample(|u| body.radial(u));
    harmonic_invert(&grid, &values, max_degree.unwrap_or(settings.sphere_lat - 1))
}

/// Outcome of the intersection-body test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionVerdict {
    pub is_intersection_body: bool,
    /// `min g` over the grid.
    pub margin: f64,
    pub witness: Vec<f64>,
    pub tol: f64,
    pub resolution: usize,
    pub truncation_degree: usize,
    /// Largest `|g_eq1 - g_harmonic|` over the cross-check nodes.
    pub cross_check_error: f64,
}

/// Nodes checked against the latitude-derivative route besides the minimizer.
const CROSS_CHECKS: usize = 3;

/// Decides whether `ρ_K = Rg` with `g >= -tol` by inverting on a
/// `resolution × 2·resolution` grid (truncation degree `resolution - 1`).
/// `tol` defaults to `1e-6 · max ρ`.
pub fn is_intersection_body<B: RadialFunction + ?Sized>(
    body: &B,
    tol: Option<f64>,
    resolution: usize,
    seed: u64,
) -> Result<IntersectionVerdict> {
    require_smooth(body)?;
    if resolution < 8 {
        return Err(GeoError::invalid(format!("resolution must be >= 8, got {resolution}")));
    }
    let grid = SphereGrid::new(resolution, 2 * resolution)?;
    let rho = grid.sample(|u| body.radial(u));
    let rho_max = rho.iter().cloned().fold(0.0, f64::max);
    let inv = harmonic_invert(&grid, &rho, resolution - 1)?;
    let (k_min, margin) = inv
        .values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    let tol = tol.unwrap_or(1e-6 * rho_max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![k_min];
    nodes.extend((0..CROSS_CHECKS).map(|_| rng.gen_range(0..grid.len())));
    let mut cross_check_error: f64 = 0.0;
    for &k in &nodes {
        let u = Direction::from_slice(&grid.node(k))?;
        let g = eq1_unchecked(body, &PoleFrame::new(&u)?, &Eq1Params::default());
        cross_check_error = cross_check_error.max((g - inv.values[k]).abs());
    }
    let budget = 1e-3 * rho_max;
    if cross_check_error > budget {
        return Err(GeoError::NoConvergence {
            what: "harmonic inversion disagrees with the latitude-derivative route".into(),
            residual: cross_check_error,
            tol: budget,
        });
    }
    Ok(IntersectionVerdict {
        is_intersection_body: margin >= -tol,
        margin,
        witness: grid.node(k_min).to_vec(),
        tol,
        resolution,
        truncation_degree: resolution - 1,
        cross_check_error,
    })
}

/// The star body `M'` with `IM' = L`.
#[derive(Debug, Clone)]
pub struct Preimage {
    pub body: StarBody,
    pub min_g: f64,
    /// Grid nodes where `g ∈ [-tol, 0)` was clamped to zero.
    pub clamped: usize,
    pub tol: f64,
}

struct RadialFromG<'a>(&'a HarmonicSpectrum);

impl RadialFunction for RadialFromG<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn radial(&self, u: &[f64]) -> f64 {
        (2.0 * self.0.evaluate(u).max(0.0)).sqrt()
    }
}

/// Recovers `M'` from `ρ_{M'} = (2g)^{1/2}`, `g = R⁻¹ρ_L`, tabulated on the
/// settings' grid. `tol` defaults to `1e-6 · max ρ_L`.
pub fn preimage_body<B: RadialFunction + ?Sized>(l: &B, tol: Option<f64>, settings: &Settings) -> Result<Preimage> {
    require_smooth(l)?;
    let grid = settings.sphere_grid()?;
    let rho = grid.sample(|u| l.radial(u));
    let rho_max = rho.iter().cloned().fold(0.0, f64::max);
    let inv = harmonic_invert(&grid, &rho, settings.sphere_lat - 1)?;
    let tol = tol.unwrap_or(1e-6 * rho_max);
    let (k_min, min_g) = inv
        .values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    if min_g < -tol {
        return Err(GeoError::NotAnIntersectionBody { margin: min_g, witness: grid.node(k_min).to_vec() });
    }
    let clamped = inv.values.iter().filter(|v| **v < 0.0).count();
    let spectrum = inv.spectrum.as_ref().expect("harmonic route keeps its spectrum");
    let body = tabulate(&RadialFromG(spectrum), settings.sphere_lat, 2 * settings.sphere_lat)?;
    Ok(Preimage { body, min_g, clamped, tol })
}

#[cfg(test)]
mod tests;
