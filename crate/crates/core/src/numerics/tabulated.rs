//! Inverse-CDF sampling from a tabulated density.
//!
//! The CDF is integrated exactly (to quadrature tolerance) at grid nodes and
//! interpolated between them by a monotone cubic Hermite curve whose slopes
//! are the exact density. Inversion solves the cubic on one cell.

use crate::error::{ReconError, Result};
use crate::numerics::quadrature::integrate;

/// Node placement of the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grid {
    Linear,
    /// Geometric spacing; needs a positive lower end.
    Log,
}

#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    a: f64,
    b: f64,
    grid: Grid,
    /// Normalised CDF at the nodes, `cdf[0] = 0`, last = 1.
    cdf: Vec<f64>,
    /// Per-cell slopes (left, right) in the grid coordinate `t`, normalised.
    slopes: Vec<(f64, f64)>,
    total: f64,
}

impl TabulatedCdf {
    /// Tabulate `density` on `[a, b]` with `n` nodes.
    pub fn build(density: impl Fn(f64) -> f64, a: f64, b: f64, grid: Grid, n: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() || n < 2 {
            return Err(ReconError::InvalidParameter(format!("bad table range [{a}, {b}] with {n} nodes")));
        }
        if grid == Grid::Log && a <= 0.0 {
            return Err(ReconError::InvalidParameter("log grid needs a positive lower end".into()));
        }
        let mut t = Self { a, b, grid, cdf: Vec::with_capacity(n), slopes: Vec::with_capacity(n - 1), total: 0.0 };
        let xs: Vec<f64> = (0..n).map(|i| t.x_of(i as f64 / (n - 1) as f64)).collect();
        let mut acc = 0.0;
        t.cdf.push(0.0);
        for w in xs.windows(2) {
            acc += integrate(&density, w[0], w[1], 1e-12)?.value;
            t.cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(ReconError::Numerical(format!("density has mass {acc} on [{a}, {b}]")));
        }
        t.total = acc;
        for c in t.cdf.iter_mut() {
            *c /= acc;
        }
        let h = 1.0 / (n - 1) as f64;
        let deriv: Vec<f64> = (0..n)
            .map(|i| density(xs[i]) * t.dx_dt(i as f64 * h) / acc)
            .collect();
        for i in 0..n - 1 {
            let secant = (t.cdf[i + 1] - t.cdf[i]) / h;
            let (mut m0, mut m1) = (deriv[i].max(0.0), deriv[i + 1].max(0.0));
            if secant <= 0.0 {
                m0 = 0.0;
                m1 = 0.0;
            } else {
                // Fritsch–Carlson limiter keeps each cell monotone.
                let (al, be) = (m0 / secant, m1 / secant);
                let s = al * al + be * be;
                if s > 9.0 {
                    let tau = 3.0 / s.sqrt();
                    m0 *= tau;
                    m1 *= tau;
                }
            }
            t.slopes.push((m0, m1));
        }
        Ok(t)
    }

    /// Integral of the density over the table range.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn range(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Node CDFs are non-decreasing and every cell's slopes are non-negative,
    /// which together make the interpolant monotone.
    pub fn is_monotone(&self) -> bool {
        self.cdf.windows(2).all(|w| w[0] <= w[1]) && self.slopes.iter().all(|&(a, b)| a >= 0.0 && b >= 0.0)
    }

    fn x_of(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.a;
        }
        if t >= 1.0 {
            return self.b;
        }
        match self.grid {
            Grid::Linear => self.a + (self.b - self.a) * t,
            Grid::Log => self.a * (self.b / self.a).powf(t),
        }
    }

    fn t_of(&self, x: f64) -> f64 {
        match self.grid {
            Grid::Linear => (x - self.a) / (self.b - self.a),
            Grid::Log => (x / self.a).ln() / (self.b / self.a).ln(),
        }
    }

    fn dx_dt(&self, t: f64) -> f64 {
        match self.grid {
            Grid::Linear => self.b - self.a,
            Grid::Log => self.x_of(t) * (self.b / self.a).ln(),
        }
    }

    fn cells(&self) -> usize {
        self.slopes.len()
    }

    fn hermite(&self, i: usize, s: f64) -> (f64, f64) {
        let h = 1.0 / self.cells() as f64;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = self.slopes[i];
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * m1;
        let dv = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * h * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * h * m1;
        (v, dv)
    }

    /// Normalised CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let t = self.t_of(x) * self.cells() as f64;
        let i = (t.floor() as usize).min(self.cells() - 1);
        self.hermite(i, t - i as f64).0.clamp(0.0, 1.0)
    }

    /// Quantile at level `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.a;
        }
        if u >= 1.0 {
            return self.b;
        }
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cells()) - 1;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut s = if self.cdf[i + 1] > self.cdf[i] {
            (u - self.cdf[i]) / (self.cdf[i + 1] - self.cdf[i])
        } else {
            0.5
        };
        for _ in 0..100 {
            let (v, dv) = self.hermite(i, s);
            let r = v - u;
            if r.abs() <= 1e-15 {
                break;
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let step = if dv > 0.0 { s - r / dv } else { f64::NAN };
            s = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        self.x_of((i as f64 + s) / self.cells() as f64)
    }
}
