//! The continuous tail `gamma e^{delta y} / y^2` on `[M, b]` and its
//! variants tilted by the colour-mismatch weight `1 / (e^y + 1/(k-1))`.

use rand::Rng;

use crate::error::{ReconError, Result};
use crate::numerics::{bisect, integrate, integrate_simpson, Grid, TabulatedCdf};

const TABLE_NODES: usize = 1025;
const QUAD_TOL: f64 = 1e-12;

/// `e^{delta y} / y^2`, the tail density without its scale.
#[inline]
pub(crate) fn tail_shape(delta: f64, y: f64) -> f64 {
    (delta * y).exp() / (y * y)
}

/// `e^{delta y} / (y^2 (e^y + 1/(k-1)))`, written to stay finite for large `y`.
#[inline]
pub(crate) fn mismatch_shape(delta: f64, k: usize, y: f64) -> f64 {
    ((delta - 1.0) * y).exp() / (y * y * (1.0 + (-y).exp() / (k - 1) as f64))
}

/// `integral_M^b e^{delta y}/y^2 dy`.
pub(crate) fn shape_integral(delta: f64, m: f64, b: f64) -> Result<f64> {
    Ok(integrate(|y| tail_shape(delta, y), m, b, QUAD_TOL)?.value)
}

/// Simpson value of the same integral, for cross-checks.
pub(crate) fn shape_integral_simpson(delta: f64, m: f64, b: f64) -> f64 {
    integrate_simpson(|y| tail_shape(delta, y), m, b, 1e-13)
}

/// Upper end `b` with `integral_M^b e^{delta y}/y^2 dy = target`.
pub(crate) fn solve_upper(delta: f64, m: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(ReconError::InvalidParameter(format!(
            "tail must carry positive mass, requested {target}"
        )));
    }
    let mut hi = m + 1.0;
    while shape_integral(delta, m, hi)? < target {
        hi = m + 2.0 * (hi - m);
        if hi - m > 1e5 {
            return Err(ReconError::Numerical(format!("no tail end found for mass {target}")));
        }
    }
    // The integrand grows at least like e^{delta y}/y^2 > 0, so a root exists
    // in the bracket and is unique.
    bisect(|b| shape_integral(delta, m, b).map(|v| v - target).unwrap_or(f64::NAN), m, hi, 1e-13 * hi)
}

/// Inverse-CDF sampler of the tail density normalised on `[M, b]`.
#[derive(Clone, Debug)]
pub struct TailTable {
    m: f64,
    b: f64,
    table: TabulatedCdf,
}

impl TailTable {
    pub fn new(delta: f64, m: f64, b: f64) -> Result<Self> {
        let table = TabulatedCdf::build(|y| tail_shape(delta, y), m, b, Grid::Log, TABLE_NODES)?;
        if !table.is_monotone() {
            return Err(ReconError::Numerical("tail table is not monotone".into()));
        }
        Ok(Self { m, b, table })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.m, self.b)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.table.cdf(y)
    }

    /// Draw in `(M, b]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = 1.0 - rng.random::<f64>();
        let y = self.table.quantile(u);
        if y > self.m {
            y.min(self.b)
        } else {
            self.m.next_up()
        }
    }
}

/// Exact draw from the mismatch-tilted tail on `(M, b]` (`b` may be
/// infinite): a truncated exponential proposal of rate `1 - delta`,
/// accepted with probability `(M/y)^2 / (1 + e^{-y}/(k-1))`.
pub(crate) fn sample_mismatch<R: Rng + ?Sized>(delta: f64, k: usize, m: f64, b: f64, rng: &mut R) -> f64 {
    let rate = 1.0 - delta;
    let span = if b.is_finite() { -(-(rate * (b - m))).exp_m1() } else { 1.0 };
    let c = 1.0 / (k - 1) as f64;
    loop {
        let u = rng.random::<f64>();
        let y = m - (-(u * span)).ln_1p() / rate;
        if !(y > m) || y > b {
            continue;
        }
        let acc = (m / y).powi(2) / (1.0 + (-y).exp() * c);
        if rng.random::<f64>() < acc {
            return y;
        }
    }
}
