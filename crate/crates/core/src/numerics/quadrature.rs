//! Adaptive quadrature.
//!
//! The workhorse is a globally adaptive 7/15-point Gauss–Kronrod rule. An
//! adaptive Simpson rule is kept alongside as an independent cross-check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{ReconError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Result of an integration: value and estimated absolute error.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Quadrature> {
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(ReconError::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge (estimate {total}, error {err})"
            )));
        }
        let p = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Interval can no longer be split in floating point.
            heap.push(Piece { error: 0.0, ..p });
            total = heap.iter().map(|q| q.value).sum();
            err = heap.iter().map(|q| q.error).sum();
            continue;
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value = heap.iter().map(|q| q.value).sum();
    let error = heap.iter().map(|q| q.error).sum();
    if !f64::is_finite(value) {
        return Err(ReconError::Numerical(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(Quadrature { value, error })
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `b` may be `+inf`; the tail is mapped onto `[0, 1)` by `x = a + t/(1-t)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(ReconError::InvalidParameter(format!("bad integration range [{a}, {b}]")));
    }
    if b < a {
        let q = integrate(f, b, a, rel_tol)?;
        return Ok(Quadrature { value: -q.value, error: q.error });
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }
    if b == f64::INFINITY {
        let g = |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        };
        return adapt(&g, 0.0, 1.0, rel_tol, 1e-300);
    }
    adapt(&f, a, b, rel_tol, 1e-300)
}

/// Adaptive Simpson rule on a finite range, used to cross-check [`integrate`].
pub fn integrate_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, b, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((q.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_tail() {
        let q = integrate(|x| (-x).exp(), 1.0, f64::INFINITY, 1e-12).unwrap();
        assert!((q.value - (-1.0f64).exp()).abs() < 1e-13);
        let q = integrate(|x| 1.0 / (x * x), 10.0, f64::INFINITY, 1e-12).unwrap();
        assert!((q.value - 0.1).abs() < 1e-13);
    }

    #[test]
    fn reversed_range_negates() {
        let q = integrate(f64::sin, 1.0, 0.0, 1e-12).unwrap();
        assert!((q.value + (1.0 - 1f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn kronrod_agrees_with_simpson() {
        let f = |y: f64| (0.5 * y).exp() / (y * y);
        let gk = integrate(f, 10.0, 25.0, 1e-12).unwrap().value;
        let si = integrate_simpson(f, 10.0, 25.0, 1e-10);
        assert!(((gk - si) / gk).abs() < 1e-10);
    }

    #[test]
    fn sharp_peak() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3) * (x - 0.3));
        let exact = 100.0 * ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan());
        let q = integrate(f, 0.0, 1.0, 1e-11).unwrap();
        assert!(((q.value - exact) / exact).abs() < 1e-10);
    }
}
