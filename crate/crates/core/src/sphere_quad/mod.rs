//! Deterministic quadrature on spheres and great subspheres.
//!
//! Rules on S² are products of Gauss–Legendre in `cos φ` and a uniform
//! azimuthal grid; great circles use the periodic trapezoid; everything in
//! higher dimension is seeded Monte Carlo. All rules carry weights whose sum is
//! the closed-form measure of their domain.

mod harmonics;
mod legendre;

pub use harmonics::{analyze, sph_harm, synthesize, synthesize_grid, HarmonicSpectrum, MAX_DEGREE};
pub use legendre::{gauss_legendre, gauss_legendre_on, legendre_at_zero};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{GeoError, Result};

/// Surface measure of the unit sphere `S^{n-1}` in `Rⁿ`, `2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Volume of the unit ball in `Rⁿ`, `π^{n/2} / Γ(n/2 + 1)`.
pub fn ball_volume(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    sphere_area(n) / n as f64
}

/// A unit vector in `Rⁿ`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`; rejects `n < 2`, non-finite input and the zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(GeoError::invalid(format!("direction needs n >= 2, got {}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeoError::invalid("direction has non-finite coordinates"));
        }
        let norm = norm(&coords);
        if norm == 0.0 {
            return Err(GeoError::invalid("zero vector is not a direction"));
        }
        Ok(Direction(coords.into_iter().map(|c| c / norm).collect()))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// The `i`-th coordinate axis of `Rⁿ`.
    pub fn axis(n: usize, i: usize) -> Self {
        assert!(n >= 2 && i < n);
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Direction(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Direction(self.0.iter().map(|c| -c).collect())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = GeoError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Householder reflection `H = I - β w wᵀ` with `H e₁ = -s u`, where `s` is the
/// sign of the first nonzero coordinate of `u`.
///
/// `w = u + s e₁` has `|w|² >= 2`, so the construction never divides by a small
/// number, and `u` and `-u` produce the same reflection.
#[derive(Debug, Clone)]
pub struct Householder {
    w: Vec<f64>,
    beta: f64,
}

impl Householder {
    pub fn new(u: &[f64]) -> Self {
        let s = u
            .iter()
            .find(|c| **c != 0.0)
            .map(|c| if c.is_sign_negative() { -1.0 } else { 1.0 })
            .unwrap_or(1.0);
        let mut w = u.to_vec();
        w[0] += s;
        let beta = 2.0 / dot(&w, &w);
        Householder { w, beta }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `H e_k`; for `k >= 1` these are an orthonormal basis of `u⊥`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        let wk = self.w[k];
        let mut col: Vec<f64> = self.w.iter().map(|wi| -self.beta * wi * wk).collect();
        col[k] += 1.0;
        col
    }

    /// Writes `H (0, tail)` into `out`: the point of `u⊥` with coordinates
    /// `tail` in the basis `H e_2, …, H e_n`.
    #[inline]
    pub fn embed(&self, tail: &[f64], out: &mut [f64]) {
        let proj: f64 = self.w[1..].iter().zip(tail).map(|(w, t)| w * t).sum::<f64>() * self.beta;
        out[0] = -proj * self.w[0];
        for k in 1..out.len() {
            out[k] = tail[k - 1] - proj * self.w[k];
        }
    }
}

/// Orthonormal basis of `u⊥`, the columns `2..n` of the Householder
/// completion of `u`.
pub fn orthonormal_basis(u: &Direction) -> Vec<Direction> {
    let h = Householder::new(u.as_slice());
    (1..u.dim()).map(|k| Direction(h.column(k))).collect()
}

/// Integration domain of a rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `S^{n-1}`.
    FullSphere { n: usize },
    /// `S^{n-1} ∩ normal⊥`.
    Subsphere { normal: Direction },
}

impl Domain {
    /// Closed-form measure of the domain.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::FullSphere { n } => sphere_area(*n),
            Domain::Subsphere { normal } => sphere_area(normal.dim() - 1),
        }
    }
}

/// Nodes and positive weights in surface-measure units.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: Domain,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ wᵢ f(xᵢ)`, summed in node order.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Periodic trapezoid rule with `m` nodes on the great circle `S² ∩ u⊥`.
pub fn great_circle_rule(u: &Direction, m: usize) -> Result<QuadratureRule> {
    if u.dim() != 3 {
        return Err(GeoError::DimensionMismatch { expected: 3, got: u.dim() });
    }
    if m < 4 {
        return Err(GeoError::invalid(format!("great circle rule needs m >= 4, got {m}")));
    }
    let h = Householder::new(u.as_slice());
    let (e1, e2) = (h.column(1), h.column(2));
    let mut nodes = Vec::with_capacity(3 * m);
    for k in 0..m {
        let t = 2.0 * PI * k as f64 / m as f64;
        let (s, c) = t.sin_cos();
        nodes.extend((0..3).map(|i| c * e1[i] + s * e2[i]));
    }
    Ok(QuadratureRule {
        dim: 3,
        nodes,
        weights: vec![2.0 * PI / m as f64; m],
        domain: Domain::Subsphere { normal: u.clone() },
    })
}

/// Allocation-free great-circle integration on S², identical in nodes and
/// summation order to [`great_circle_rule`].
#[derive(Debug, Clone)]
pub struct GreatCircle {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl GreatCircle {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(GeoError::invalid(format!("great circle rule needs m >= 4, got {m}")));
        }
        let (cos, sin) = (0..m)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / m as f64).sin_cos();
                (c, s)
            })
            .unzip();
        Ok(GreatCircle { cos, sin })
    }

    pub fn nodes(&self) -> usize {
        self.cos.len()
    }

    /// `∫_{S² ∩ u⊥} f`.
    pub fn integrate(&self, u: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        let h = Householder::new(u);
        let (e1, e2) = (h.column(1), h.column(2));
        let w = 2.0 * PI / self.cos.len() as f64;
        let mut v = [0.0; 3];
        let mut total = 0.0;
        for (c, s) in self.cos.iter().zip(&self.sin) {
            for i in 0..3 {
                v[i] = c * e1[i] + s * e2[i];
            }
            total += w * f(&v);
        }
        total
    }
}

/// Pre-drawn isotropic samples on `S^{n-2}`, reused across great subspheres.
///
/// For a normal `u`, sample `g ∈ S^{n-2} ⊂ R^{n-1}` is mapped into `u⊥` by the
/// Householder completion of `u`, so every subsphere sees the same random
/// numbers.
#[derive(Debug, Clone)]
pub struct SubsphereSampler {
    n: usize,
    samples: Vec<f64>,
}

impl SubsphereSampler {
    pub fn new(n: usize, count: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(GeoError::invalid(format!("subsphere sampling needs n >= 3, got {n}")));
        }
        if count < 100 {
            return Err(GeoError::invalid(format!("need at least 100 samples, got {count}")));
        }
        Ok(SubsphereSampler { n, samples: gaussian_directions(n - 1, count, seed) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.samples.len() / (self.n - 1)
    }

    /// Weight attached to each node, `|S^{n-2}| / N`.
    pub fn weight(&self) -> f64 {
        sphere_area(self.n - 1) / self.count() as f64
    }

    pub fn rule(&self, u: &Direction) -> Result<QuadratureRule> {
        if u.dim() != self.n {
            return Err(GeoError::DimensionMismatch { expected: self.n, got: u.dim() });
        }
        let h = Householder::new(u.as_slice());
        let mut nodes = vec![0.0; self.n * self.count()];
        for (tail, out) in self.samples.chunks_exact(self.n - 1).zip(nodes.chunks_exact_mut(self.n)) {
            h.embed(tail, out);
        }
        Ok(QuadratureRule {
            dim: self.n,
            nodes,
            weights: vec![self.weight(); self.count()],
            domain: Domain::Subsphere { normal: u.clone() },
        })
    }

    /// `∫_{S^{n-1} ∩ u⊥} f`, estimated with the stored samples.
    pub fn integrate(&self, u: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut total = 0.0;
        self.for_each(u, |v| total += f(v));
        total * self.weight()
    }

    /// Visits the nodes of the subsphere orthogonal to `u` in sample order.
    pub fn for_each(&self, u: &[f64], mut f: impl FnMut(&[f64])) {
        let h = Householder::new(u);
        let mut v = vec![0.0; self.n];
        for tail in self.samples.chunks_exact(self.n - 1) {
            h.embed(tail, &mut v);
            f(&v);
        }
    }
}

/// Seeded Monte Carlo rule on `S^{n-1} ∩ u⊥` with `count` nodes.
pub fn subsphere_rule(u: &Direction, count: usize, seed: u64) -> Result<QuadratureRule> {
    SubsphereSampler::new(u.dim(), count, seed)?.rule(u)
}

/// `count` seeded uniform directions in `Rⁿ`, packed row-major.
pub fn gaussian_directions(n: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n * count);
    let mut buf = vec![0.0; n];
    for _ in 0..count {
        loop {
            for b in buf.iter_mut() {
                *b = StandardNormal.sample(&mut rng);
            }
            let r = norm(&buf);
            if r > 1e-12 {
                out.extend(buf.iter().map(|b| b / r));
                break;
            }
        }
    }
    out
}

/// `count` seeded uniform directions as [`Direction`] values.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Direction> {
    gaussian_directions(n, count, seed)
        .chunks_exact(n)
        .map(|c| Direction(c.to_vec()))
        .collect()
}

/// Gauss–Legendre(`cos φ`) × uniform(`θ`) product grid on S².
///
/// Node `(i, j)` has `cos φ = xᵢ` (ascending Gauss–Legendre node) and
/// `θ = 2πj / n_lon`; nodes are stored latitude-major.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n_lat: usize,
    n_lon: usize,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat < 2 || n_lon < 4 {
            return Err(GeoError::invalid(format!("sphere grid {n_lat}x{n_lon} too small")));
        }
        let (x, w) = gauss_legendre(n_lat);
        Ok(SphereGrid { n_lat, n_lon, x, w })
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn len(&self) -> usize {
        self.n_lat * self.n_lon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cos_phi(&self, i: usize) -> f64 {
        self.x[i]
    }

    pub fn lat_weight(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.w[k / self.n_lon] * 2.0 * PI / self.n_lon as f64
    }

    /// `(θ, φ)` of node `k`.
    pub fn angles(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.n_lon, k % self.n_lon);
        (2.0 * PI * j as f64 / self.n_lon as f64, self.x[i].acos())
    }

    pub fn node(&self, k: usize) -> [f64; 3] {
        let (i, j) = (k / self.n_lon, k % self.n_lon);
        let z = self.x[i];
        let s = (1.0 - z * z).sqrt();
        let (st, ct) = (2.0 * PI * j as f64 / self.n_lon as f64).sin_cos();
        [s * ct, s * st, z]
    }

    /// Evaluates `f` at every node, latitude-major.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(|k| f(&self.node(k))).collect()
    }

    /// `Σ w_k v_k` in node order.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(k, v)| self.weight(k) * v).sum()
    }

    pub fn rule(&self) -> QuadratureRule {
        let mut nodes = Vec::with_capacity(3 * self.len());
        for k in 0..self.len() {
            nodes.extend(self.node(k));
        }
        QuadratureRule {
            dim: 3,
            nodes,
            weights: (0..self.len()).map(|k| self.weight(k)).collect(),
            domain: Domain::FullSphere { n: 3 },
        }
    }
}

/// Default full-sphere rule: the product grid `resolution × 2·resolution` on
/// S², `resolution` seeded Monte Carlo nodes on `S^{n-1}` for `n > 3`.
pub fn sphere_rule(n: usize, resolution: usize, seed: u64) -> Result<QuadratureRule> {
    if resolution < 8 {
        return Err(GeoError::invalid(format!("sphere rule needs resolution >= 8, got {resolution}")));
    }
    match n {
        0..=2 => Err(GeoError::invalid(format!("sphere rule needs n >= 3, got {n}"))),
        3 => Ok(SphereGrid::new(resolution, 2 * resolution)?.rule()),
        _ => {
            let nodes = gaussian_directions(n, resolution, seed);
            Ok(QuadratureRule {
                dim: n,
                nodes,
                weights: vec![sphere_area(n) / resolution as f64; resolution],
                domain: Domain::FullSphere { n },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_defect(vectors: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn closed_form_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        // |S⁸| = 2π^{4.5} / Γ(4.5), Γ(4.5) = 105√π / 16
        let gamma_45 = 105.0 * PI.sqrt() / 16.0;
        assert!((sphere_area(9) - 2.0 * PI.powf(4.5) / gamma_45).abs() < 1e-12);
        assert!((sphere_area(9) - 29.6866).abs() < 1e-3);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn direction_normalizes_and_validates() {
        let d = Direction::new(vec![3.0, 4.0]).unwrap();
        assert!((norm(d.as_slice()) - 1.0).abs() < 1e-15);
        assert!(Direction::new(vec![1.0]).is_err());
        assert!(Direction::new(vec![0.0, 0.0, 0.0]).is_err());
        assert!(Direction::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn basis_for_x_axis_spans_yz_plane() {
        let u = Direction::axis(3, 0);
        let b = orthonormal_basis(&u);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(v.as_slice()[0].abs() < 1e-15);
        }
        let mut all = vec![u.as_slice().to_vec()];
        all.extend(b.iter().map(|v| v.as_slice().to_vec()));
        assert!(gram_defect(&all) < 1e-15);
    }

    #[test]
    fn basis_for_z_axis_is_orthogonal_to_it() {
        let u = Direction::axis(3, 2);
        for v in orthonormal_basis(&u) {
            assert!(u.dot(v.as_slice()).abs() < 1e-14);
        }
    }

    #[test]
    fn basis_is_orthonormal_in_five_dimensions() {
        for u in random_directions(5, 50, 11) {
            let mut all = vec![u.as_slice().to_vec()];
            all.extend(orthonormal_basis(&u).into_iter().map(Vec::from));
            assert!(gram_defect(&all) < 1e-12);
        }
    }

    #[test]
    fn basis_is_deterministic_and_shared_by_antipodes() {
        let u = Direction::new(vec![0.2, -0.7, 0.4]).unwrap();
        assert_eq!(orthonormal_basis(&u), orthonormal_basis(&u));
        assert_eq!(orthonormal_basis(&u), orthonormal_basis(&u.neg()));
        let w = Direction::new(vec![0.0, -0.7, 0.4]).unwrap();
        assert_eq!(orthonormal_basis(&w), orthonormal_basis(&w.neg()));
    }

    #[test]
    fn great_circle_weights_and_moments() {
        let u = Direction::axis(3, 2);
        let rule = great_circle_rule(&u, 64).unwrap();
        assert!((rule.integrate(|_| 1.0) - 2.0 * PI).abs() < 1e-13);
        assert!((rule.integrate(|v| v[0] * v[0]) - PI).abs() < 1e-13);
        assert!(rule.integrate(|v| v[0]).abs() < 1e-13);
        assert!(matches!(great_circle_rule(&u, 3), Err(GeoError::InvalidParameter(_))));
    }

    #[test]
    fn great_circle_is_exact_for_low_trig_degree() {
        let m = 32;
        let u = Direction::new(vec![0.3, 0.5, -0.2]).unwrap();
        let h = Householder::new(u.as_slice());
        let e1 = h.column(1);
        let rule = great_circle_rule(&u, m).unwrap();
        // ∫ cos^{2k}(t) dt over [0, 2π] = 2π (2k)! / (4^k (k!)²), exact while 2k < m
        for k in 0..(m / 4) {
            let q = rule.integrate(|v| dot(v, &e1).powi(2 * k as i32));
            let mut exact = 2.0 * PI;
            for j in 1..=k {
                exact *= (2 * j - 1) as f64 / (2 * j) as f64;
            }
            assert!((q - exact).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn great_circle_helper_matches_rule() {
        let u = Direction::new(vec![0.1, 0.9, 0.3]).unwrap();
        let rule = great_circle_rule(&u, 256).unwrap();
        let fast = GreatCircle::new(256).unwrap();
        let f = |v: &[f64]| v[0] * v[0] + v[1].abs() + 0.1 * v[2];
        assert_eq!(rule.integrate(f), fast.integrate(u.as_slice(), f));
    }

    #[test]
    fn subsphere_rule_weights_and_determinism() {
        let u = Direction::axis(4, 1);
        let rule = subsphere_rule(&u, 1000, 5).unwrap();
        assert!((rule.weight_sum() - 4.0 * PI).abs() < 1e-12);
        for v in rule.nodes() {
            assert!(u.dot(v).abs() < 1e-14);
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
        let u10 = Direction::axis(10, 0);
        let r10 = subsphere_rule(&u10, 500, 5).unwrap();
        assert!((r10.weight_sum() - sphere_area(9)).abs() < 1e-11);
        let again = subsphere_rule(&u, 1000, 5).unwrap();
        assert!(rule.nodes().zip(again.nodes()).all(|(a, b)| a == b));
        assert!(subsphere_rule(&u, 99, 5).is_err());
    }

    #[test]
    fn sphere_rule_weight_sums_and_moments() {
        let r3 = sphere_rule(3, 64, 0).unwrap();
        assert_eq!(r3.len(), 64 * 128);
        assert!((r3.weight_sum() - 4.0 * PI).abs() < 1e-12);
        assert!((r3.integrate(|u| u[2] * u[2]) - 4.0 * PI / 3.0).abs() < 1e-12);
        let r5 = sphere_rule(5, 1000, 3).unwrap();
        assert!((r5.weight_sum() - 8.0 * PI * PI / 3.0).abs() < 1e-11);
        assert!((r5.weight_sum() - 26.3189).abs() < 1e-3);
        assert!(sphere_rule(3, 7, 0).is_err());
    }

    #[test]
    fn sampler_integrate_matches_materialized_rule() {
        let s = SubsphereSampler::new(6, 300, 9).unwrap();
        let u = Direction::new(vec![0.3, -0.1, 0.5, 0.2, 0.0, -0.4]).unwrap();
        let f = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let rule = s.rule(&u).unwrap();
        let a = rule.integrate(f);
        let b = s.integrate(u.as_slice(), f);
        assert!((a - b).abs() < 1e-12 * a.abs());
    }
}
