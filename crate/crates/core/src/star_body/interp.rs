use std::f64::consts::PI;

/// Cubic spline with prescribed end slopes.
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Clamped spline through `(x, y)` with `s'(x₀) = d0`, `s'(x_end) = d1`.
    /// `x` must be strictly increasing with at least two entries.
    pub(crate) fn clamped(x: &[f64], y: &[f64], d0: f64, d1: f64) -> Self {
        let n = x.len();
        debug_assert!(n >= 2 && y.len() == n);
        // Tridiagonal system for the second derivatives.
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let h0 = x[1] - x[0];
        b[0] = h0 / 3.0;
        c[0] = h0 / 6.0;
        r[0] = (y[1] - y[0]) / h0 - d0;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        let hn = x[n - 1] - x[n - 2];
        a[n - 1] = hn / 6.0;
        b[n - 1] = hn / 3.0;
        r[n - 1] = d1 - (y[n - 1] - y[n - 2]) / hn;
        // Thomas algorithm.
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        CubicSpline { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|xi| *xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value and first derivative at `t` (cubic extrapolation outside the knots).
    pub(crate) fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * mi + (3.0 * b * b - 1.0) * mj) * h / 6.0;
        (v, d)
    }
}

/// Radial samples on the cell-centred grid `φᵢ = (i + ½)π / n_phi`,
/// `θⱼ = 2πj / n_theta`, interpolated across the poles by continuing
/// meridians onto the opposite half plane.
#[derive(Debug, Clone)]
pub(crate) struct SampledGrid {
    pub(crate) n_phi: usize,
    pub(crate) n_theta: usize,
    pub(crate) values: Vec<f64>,
    pub(crate) cubic: bool,
}

impl SampledGrid {
    #[inline]
    fn at(&self, i: i64, j: i64) -> f64 {
        let (np, nt) = (self.n_phi as i64, self.n_theta as i64);
        let (i, j) = if i < 0 {
            (-1 - i, j + nt / 2)
        } else if i >= np {
            (2 * np - 1 - i, j + nt / 2)
        } else {
            (i, j)
        };
        self.values[(i * nt + j.rem_euclid(nt)) as usize]
    }

    pub(crate) fn node(&self, i: usize, j: usize) -> [f64; 3] {
        let phi = (i as f64 + 0.5) * PI / self.n_phi as f64;
        let theta = 2.0 * PI * j as f64 / self.n_theta as f64;
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        [sp * ct, sp * st, cp]
    }

    pub(crate) fn eval(&self, u: &[f64]) -> f64 {
        let phi = u[2].clamp(-1.0, 1.0).acos();
        let theta = u[1].atan2(u[0]);
        let fi = phi * self.n_phi as f64 / PI - 0.5;
        let fj = theta * self.n_theta as f64 / (2.0 * PI);
        let (i0, t) = (fi.floor(), fi - fi.floor());
        let (j0, s) = (fj.floor(), fj - fj.floor());
        let (i0, j0) = (i0 as i64, j0 as i64);
        let v = if self.cubic {
            let wi = catmull_rom(t);
            let wj = catmull_rom(s);
            let mut acc = 0.0;
            for (a, wa) in wi.iter().enumerate() {
                let mut row = 0.0;
                for (b, wb) in wj.iter().enumerate() {
                    row += wb * self.at(i0 - 1 + a as i64, j0 - 1 + b as i64);
                }
                acc += wa * row;
            }
            acc
        } else {
            let r0 = (1.0 - s) * self.at(i0, j0) + s * self.at(i0, j0 + 1);
            let r1 = (1.0 - s) * self.at(i0 + 1, j0) + s * self.at(i0 + 1, j0 + 1);
            (1.0 - t) * r0 + t * r1
        };
        v.max(0.0)
    }

    /// Largest violation of `ρ(u) = ρ(-u)` over the samples.
    pub(crate) fn evenness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_phi {
            for j in 0..self.n_theta {
                let a = self.values[i * self.n_theta + j];
                let b = self.values
                    [(self.n_phi - 1 - i) * self.n_theta + (j + self.n_theta / 2) % self.n_theta];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}
