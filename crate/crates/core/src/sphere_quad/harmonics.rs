//! Real orthonormal spherical harmonics on S².
//!
//! Convention: `φ` is the polar angle measured from `+e₃`, `θ` the azimuth
//! from `+e₁` towards `+e₂`. For `m > 0` the harmonic is
//! `√2 p̄_l^m(cos φ) cos(mθ)`, for `m < 0` it is `√2 p̄_l^|m|(cos φ) sin(|m|θ)`,
//! and `p̄_l^0(cos φ)` for `m = 0`. There is no Condon–Shortley phase.

use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::{PI, SQRT_2};

use super::legendre::{normalized_legendre_table, tri};
use super::SphereGrid;
use crate::error::{GeoError, Result};

thread_local! {
    static LEGENDRE_SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Largest degree accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 512;

/// Value of the real harmonic `Y_l^m(θ, φ)`.
pub fn sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(GeoError::invalid(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    if l > MAX_DEGREE {
        return Err(GeoError::invalid(format!("degree {l} above {MAX_DEGREE}")));
    }
    let mut table = Vec::new();
    normalized_legendre_table(l, phi.cos(), &mut table);
    let ma = m.unsigned_abs() as usize;
    let p = table[tri(l, ma)];
    Ok(match m {
        0 => p,
        m if m > 0 => SQRT_2 * p * (m as f64 * theta).cos(),
        _ => SQRT_2 * p * (ma as f64 * theta).sin(),
    })
}

/// Real harmonic coefficients `c_{l,m}`, `0 <= l <= L`, `-l <= m <= l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    max_degree: usize,
    coeffs: Vec<f64>,
}

impl HarmonicSpectrum {
    pub fn zeros(max_degree: usize) -> Self {
        let n = (max_degree + 1) * (max_degree + 1);
        HarmonicSpectrum { max_degree, coeffs: vec![0.0; n] }
    }

    /// Builds a spectrum from `(l, m, c)` triples; repeated entries add up.
    pub fn from_terms(terms: &[(usize, i64, f64)]) -> Result<Self> {
        let max_degree = terms.iter().map(|t| t.0).max().unwrap_or(0);
        if max_degree > MAX_DEGREE {
            return Err(GeoError::invalid(format!("degree {max_degree} above {MAX_DEGREE}")));
        }
        let mut s = Self::zeros(max_degree);
        for &(l, m, c) in terms {
            if m.unsigned_abs() as usize > l {
                return Err(GeoError::invalid(format!("harmonic index ({l}, {m}) out of range")));
            }
            *s.get_mut(l, m) += c;
        }
        Ok(s)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.max_degree || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        self.coeffs[Self::index(l, m)]
    }

    pub fn get_mut(&mut self, l: usize, m: i64) -> &mut f64 {
        assert!(l <= self.max_degree && m.unsigned_abs() as usize <= l);
        &mut self.coeffs[Self::index(l, m)]
    }

    #[inline]
    fn index(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    /// Iterates `(l, m, c)` in degree-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.max_degree).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.coeffs[Self::index(l, m)]))
        })
    }

    /// Largest coefficient magnitude over odd degrees.
    pub fn odd_magnitude(&self) -> f64 {
        self.iter()
            .filter(|(l, _, _)| l % 2 == 1)
            .fold(0.0, |acc, (_, _, c)| acc.max(c.abs()))
    }

    /// Multiplies every degree-`l` block by `f(l)`.
    pub fn scale_degrees(&self, f: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.max_degree {
            let k = f(l);
            for m in -(l as i64)..=l as i64 {
                out.coeffs[Self::index(l, m)] *= k;
            }
        }
        out
    }

    /// Evaluates the expansion at a unit vector of R³.
    pub fn evaluate(&self, u: &[f64]) -> f64 {
        LEGENDRE_SCRATCH.with(|t| self.evaluate_with(u, &mut t.borrow_mut()))
    }

    fn evaluate_with(&self, u: &[f64], table: &mut Vec<f64>) -> f64 {
        let lmax = self.max_degree;
        let (x, y, z) = (u[0], u[1], u[2]);
        normalized_legendre_table(lmax, z.clamp(-1.0, 1.0), table);
        let s = x.hypot(y);
        let (c1, s1) = if s > 0.0 { (x / s, y / s) } else { (1.0, 0.0) };
        let mut total = 0.0;
        // cos(mθ), sin(mθ) by the Chebyshev recurrence; negating (x, y) flips
        // the signs exactly, which keeps even expansions bitwise even.
        let (mut cm, mut sm) = (1.0, 0.0);
        let (mut cprev, mut sprev) = (c1, -s1);
        for m in 0..=lmax {
            if m > 0 {
                let cn = 2.0 * c1 * cm - cprev;
                let sn = 2.0 * c1 * sm - sprev;
                cprev = cm;
                sprev = sm;
                cm = cn;
                sm = sn;
            }
            let mut a = 0.0;
            let mut b = 0.0;
            for l in m..=lmax {
                let p = table[tri(l, m)];
                a += self.coeffs[Self::index(l, m as i64)] * p;
                if m > 0 {
                    b += self.coeffs[Self::index(l, -(m as i64))] * p;
                }
            }
            total += if m == 0 { a } else { SQRT_2 * (a * cm + b * sm) };
        }
        total
    }
}

/// Projects samples on a product grid onto real harmonics up to `max_degree`.
///
/// Exact for band-limited input as long as `max_degree < n_lat` and
/// `2 * max_degree < n_lon`; anything coarser is rejected.
pub fn analyze(grid: &SphereGrid, values: &[f64], max_degree: usize) -> Result<HarmonicSpectrum> {
    if values.len() != grid.len() {
        return Err(GeoError::invalid(format!(
            "expected {} grid samples, got {}",
            grid.len(),
            values.len()
        )));
    }
    if max_degree > MAX_DEGREE {
        return Err(GeoError::invalid(format!("degree {max_degree} above {MAX_DEGREE}")));
    }
    if max_degree + 1 > grid.n_lat() || 2 * max_degree >= grid.n_lon() {
        return Err(GeoError::invalid(format!(
            "grid {}x{} undersampled for degree {max_degree}",
            grid.n_lat(),
            grid.n_lon()
        )));
    }
    let n_lon = grid.n_lon();
    let (cos_tab, sin_tab) = trig_table(n_lon);
    let dtheta = 2.0 * PI / n_lon as f64;
    let mut spec = HarmonicSpectrum::zeros(max_degree);
    let mut table = Vec::new();
    for i in 0..grid.n_lat() {
        let row = &values[i * n_lon..(i + 1) * n_lon];
        normalized_legendre_table(max_degree, grid.cos_phi(i), &mut table);
        let wi = grid.lat_weight(i) * dtheta;
        for m in 0..=max_degree {
            let mut c = 0.0;
            let mut s = 0.0;
            for (j, f) in row.iter().enumerate() {
                let k = (m * j) % n_lon;
                c += f * cos_tab[k];
                s += f * sin_tab[k];
            }
            for l in m..=max_degree {
                let p = table[tri(l, m)] * wi;
                if m == 0 {
                    spec.coeffs[HarmonicSpectrum::index(l, 0)] += p * c;
                } else {
                    spec.coeffs[HarmonicSpectrum::index(l, m as i64)] += SQRT_2 * p * c;
                    spec.coeffs[HarmonicSpectrum::index(l, -(m as i64))] += SQRT_2 * p * s;
                }
            }
        }
    }
    Ok(spec)
}

/// Evaluates an expansion at a single unit vector.
pub fn synthesize(spec: &HarmonicSpectrum, u: &[f64]) -> f64 {
    spec.evaluate(u)
}

/// Evaluates an expansion on every node of a product grid (row-major, latitude first).
pub fn synthesize_grid(spec: &HarmonicSpectrum, grid: &SphereGrid) -> Vec<f64> {
    let lmax = spec.max_degree;
    let n_lon = grid.n_lon();
    let (cos_tab, sin_tab) = trig_table(n_lon);
    let mut out = vec![0.0; grid.len()];
    let mut table = Vec::new();
    let mut a = vec![0.0; lmax + 1];
    let mut b = vec![0.0; lmax + 1];
    for i in 0..grid.n_lat() {
        normalized_legendre_table(lmax, grid.cos_phi(i), &mut table);
        for m in 0..=lmax {
            a[m] = 0.0;
            b[m] = 0.0;
            for l in m..=lmax {
                let p = table[tri(l, m)];
                a[m] += spec.coeffs[HarmonicSpectrum::index(l, m as i64)] * p;
                if m > 0 {
                    b[m] += spec.coeffs[HarmonicSpectrum::index(l, -(m as i64))] * p;
                }
            }
        }
        for j in 0..n_lon {
            let mut v = a[0];
            for m in 1..=lmax {
                let k = (m * j) % n_lon;
                v += SQRT_2 * (a[m] * cos_tab[k] + b[m] * sin_tab[k]);
            }
            out[i * n_lon + j] = v;
        }
    }
    out
}

fn trig_table(n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            (t.cos(), t.sin())
        })
        .unzip()
}
