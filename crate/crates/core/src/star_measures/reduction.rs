use super::empirical::EmpiricalMeasure;
use super::star::StarMeasure;
use crate::error::{ReconError, Result};

/// Randomised quantile coupling that pushes a source law on star values
/// onto a dominated target law.
///
/// For `y` drawn from the source and `u` uniform, `q(y, u)` is distributed
/// as the target. When the target is dominated by the source, `q(y, u) <= y`;
/// sampling noise can break that slightly, so the output is clamped to `y`.
#[derive(Clone, Debug)]
pub struct QuantileReduction {
    k: usize,
    source: EmpiricalMeasure,
    target: EmpiricalMeasure,
}

impl QuantileReduction {
    pub fn new(source: &StarMeasure, target: &StarMeasure) -> Result<Self> {
        if source.k() != target.k() {
            return Err(ReconError::InvalidParameter("source and target differ in k".into()));
        }
        Ok(Self {
            k: source.k(),
            source: source.values().normalised()?,
            target: target.values().normalised()?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn target(&self) -> &EmpiricalMeasure {
        &self.target
    }

    /// Reduced value for input `y` and uniform `u`.
    pub fn q(&self, y: f64, u: f64) -> f64 {
        let lo = self.source.cdf_left(y);
        let hi = self.source.cdf(y);
        let level = lo + u * (hi - lo);
        let floor = 1.0 / self.k as f64;
        let x = if level <= 0.0 { floor } else { self.target.quantile_mass(level).max(floor) };
        x.min(y.max(floor))
    }

    /// Mixing weight `p` such that `(1 - p) * star(y) + p * uniform` has
    /// top coordinate `q(y, u)`.
    pub fn p(&self, y: f64, u: f64) -> f64 {
        let k = self.k as f64;
        let den = k * y - 1.0;
        if den <= 0.0 {
            return 0.0;
        }
        ((k * y - k * self.q(y, u)) / den).clamp(0.0, 1.0)
    }
}
