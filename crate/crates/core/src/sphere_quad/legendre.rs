//! Legendre polynomials: Gauss–Legendre nodes, values at zero and the
//! fully normalized associated functions used by the real harmonics.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes in ascending order.
///
/// Nodes are Newton-refined roots of `P_n`; weights are
/// `2 / ((1 - x²) P_n'(x)²)`. Symmetric pairs are written from the same root,
/// so `x[i] == -x[n - 1 - i]` holds bit-for-bit.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `P_l(0)` from the three-term recurrence; zero for odd `l`.
pub fn legendre_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let mut p = 1.0;
    let mut k = 2;
    while k <= l {
        p *= -((k - 1) as f64) / k as f64;
        k += 2;
    }
    p
}

/// Index of `(l, m)`, `0 <= m <= l`, in a packed triangular table.
#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fills `out` with the orthonormal associated Legendre functions
/// `p̄_l^m(x)`, `0 <= m <= l <= lmax`, normalized so that
/// `∫ (p̄_l^m(cos φ))² sin φ dφ = 1 / π` for `m > 0` and `1 / (2π)` for `m = 0`,
/// i.e. so that `p̄_l^0` and `√2 p̄_l^m cos(mθ)` are unit-norm on S².
/// No Condon–Shortley phase is applied.
pub(crate) fn normalized_legendre_table(lmax: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(tri(lmax, lmax) + 1, 0.0);
    let s = (1.0 - x * x).max(0.0).sqrt();
    out[0] = 0.5 / PI.sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        out[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * out[tri(m - 1, m - 1)];
    }
    for m in 0..lmax {
        let mf = m as f64;
        out[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * out[tri(m, m)];
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let l1 = lf - 1.0;
            let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
}
