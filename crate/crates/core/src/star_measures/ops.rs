use rand::Rng;

use super::empirical::EmpiricalMeasure;
use crate::error::{ReconError, Result};
use crate::tree_model::CountLaw;

/// Above this many atom pairs, [`oplus`] falls back to Monte Carlo.
pub const EXACT_CONVOLUTION_LIMIT: usize = 1_000_000;

const MASS_TOLERANCE: f64 = 1e-12;

fn ext_add(x: f64, y: f64) -> Result<f64> {
    let s = x + y;
    if s.is_nan() {
        return Err(ReconError::Numerical("indeterminate sum of opposite infinities".into()));
    }
    Ok(s)
}

/// Law of `X + Y` for independent `X ~ a`, `Y ~ b` (both probability
/// measures). Exact when the product of supports is small, otherwise built
/// from `n_samples` draws.
pub fn oplus<R: Rng + ?Sized>(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    n_samples: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    if a.is_empty() || b.is_empty() {
        return Err(ReconError::InvalidMeasure("convolution of an empty measure".into()));
    }
    if a.len().saturating_mul(b.len()) <= EXACT_CONVOLUTION_LIMIT {
        let mut pairs = Vec::with_capacity(a.len() * b.len());
        for (x, p) in a.iter() {
            for (y, q) in b.iter() {
                pairs.push((ext_add(x, y)?, p * q));
            }
        }
        return EmpiricalMeasure::from_weighted(pairs);
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        out.push(ext_add(a.sample(rng), b.sample(rng))?);
    }
    EmpiricalMeasure::from_samples(out)
}

/// Law of `Y_1 + ... + Y_N` with `N` drawn from `count` and the `Y_i`
/// i.i.d. from `b`, estimated from `n_samples` draws.
pub fn otimes<L: CountLaw, R: Rng + ?Sized>(
    count: &L,
    b: &EmpiricalMeasure,
    n_samples: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    if (b.mass() - 1.0).abs() > 1e-9 {
        return Err(ReconError::InvalidMeasure(format!("summand law has mass {}", b.mass())));
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let n = count.sample_count(rng);
        let mut s = 0.0;
        for _ in 0..n {
            s = ext_add(s, b.sample(rng))?;
        }
        out.push(s);
    }
    EmpiricalMeasure::from_samples(out)
}

fn check_mass(mu: &EmpiricalMeasure) -> Result<()> {
    if mu.mass() < 1.0 - MASS_TOLERANCE {
        return Err(ReconError::InvalidMeasure(format!("cut needs mass >= 1, got {}", mu.mass())));
    }
    Ok(())
}

/// Keep the lowest unit of mass. Returns the cut measure and the threshold
/// (`+inf` when nothing is removed). An atom straddling the threshold is
/// split.
pub fn cut_above(mu: &EmpiricalMeasure) -> Result<(EmpiricalMeasure, f64)> {
    check_mass(mu)?;
    if (mu.mass() - 1.0).abs() <= MASS_TOLERANCE {
        return Ok((mu.clone(), f64::INFINITY));
    }
    let mut pairs = Vec::new();
    let mut acc = 0.0;
    for (x, w) in mu.iter() {
        if acc + w >= 1.0 {
            pairs.push((x, 1.0 - acc));
            return Ok((EmpiricalMeasure::from_weighted(pairs)?, x));
        }
        acc += w;
        pairs.push((x, w));
    }
    unreachable!("mass exceeds one")
}

/// Keep the highest unit of mass; the threshold is `-inf` when nothing is
/// removed.
pub fn cut_below(mu: &EmpiricalMeasure) -> Result<(EmpiricalMeasure, f64)> {
    check_mass(mu)?;
    if (mu.mass() - 1.0).abs() <= MASS_TOLERANCE {
        return Ok((mu.clone(), f64::NEG_INFINITY));
    }
    let mut pairs = Vec::new();
    let mut acc = 0.0;
    for (x, w) in mu.iter().collect::<Vec<_>>().into_iter().rev() {
        if acc + w >= 1.0 {
            pairs.push((x, 1.0 - acc));
            return Ok((EmpiricalMeasure::from_weighted(pairs)?, x));
        }
        acc += w;
        pairs.push((x, w));
    }
    unreachable!("mass exceeds one")
}
