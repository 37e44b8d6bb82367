use rand::Rng;

use super::empirical::EmpiricalMeasure;
use crate::error::{ReconError, Result};

/// Relative tolerance under which two coordinates count as tied for the
/// maximum.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Point of the star set: `value` at coordinate `colour`, the remaining mass
/// split evenly over the other `k - 1` coordinates. At `value == 1/k` the
/// colour carries no information.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarVector {
    pub value: f64,
    pub colour: usize,
    pub k: usize,
}

impl StarVector {
    pub fn uniform(k: usize) -> Self {
        Self { value: 1.0 / k as f64, colour: 0, k }
    }

    /// Coordinate `m` of the vector.
    pub fn coord(&self, m: usize) -> f64 {
        if self.value == 1.0 / self.k as f64 {
            1.0 / self.k as f64
        } else if m == self.colour {
            self.value
        } else {
            (1.0 - self.value) / (self.k - 1) as f64
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.k).map(|m| self.coord(m)).collect()
    }
}

/// Project a probability vector onto the star set: keep the largest
/// coordinate (ties broken uniformly) and spread the rest evenly.
pub fn lambda_project<R: Rng + ?Sized>(v: &[f64], rng: &mut R) -> StarVector {
    let k = v.len();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = 1.0 / k as f64;
    if max <= floor {
        return StarVector { value: floor, colour: rng.random_range(0..k), k };
    }
    let tied: Vec<usize> = (0..k).filter(|&m| v[m] >= max * (1.0 - TIE_TOLERANCE)).collect();
    let colour = if tied.len() == 1 { tied[0] } else { tied[rng.random_range(0..tied.len())] };
    StarVector { value: max, colour, k }
}

/// Colour-symmetric measure on the star set, stored through its value
/// marginal on `[1/k, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarMeasure {
    k: usize,
    values: EmpiricalMeasure,
}

impl StarMeasure {
    /// Wrap a measure on values. Points within `1e-12` below `1/k` are moved
    /// onto `1/k`; anything else outside `[1/k, 1]` is rejected.
    pub fn new(k: usize, values: EmpiricalMeasure) -> Result<Self> {
        if k < 3 {
            return Err(ReconError::InvalidParameter(format!("k = {k} < 3")));
        }
        let floor = 1.0 / k as f64;
        let mut snapped = false;
        for &x in values.points() {
            if !(x <= 1.0 && x >= floor - 1e-12) {
                return Err(ReconError::InvalidMeasure(format!("star value {x} outside [1/{k}, 1]")));
            }
            snapped |= x < floor;
        }
        let values = if snapped {
            EmpiricalMeasure::from_weighted(values.iter().map(|(x, w)| (x.max(floor), w)).collect())?
        } else {
            values
        };
        Ok(Self { k, values })
    }

    pub fn from_samples(k: usize, samples: Vec<f64>) -> Result<Self> {
        Self::new(k, EmpiricalMeasure::from_samples(samples)?)
    }

    /// The measure concentrated on the frozen vectors.
    pub fn frozen(k: usize) -> Self {
        Self { k, values: EmpiricalMeasure::dirac(1.0) }
    }

    /// The measure concentrated on the uniform vector.
    pub fn uniform(k: usize) -> Self {
        Self { k, values: EmpiricalMeasure::dirac(1.0 / k as f64) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &EmpiricalMeasure {
        &self.values
    }

    pub fn into_values(self) -> EmpiricalMeasure {
        self.values
    }

    /// `(1 - theta) * self + theta * other`.
    pub fn mix(&self, theta: f64, other: &Self) -> Result<Self> {
        let a = self.values.scaled(1.0 - theta)?;
        let b = other.values.scaled(theta)?;
        Self::new(self.k, a.add(&b)?)
    }

    /// The symmetric measure on star vectors: each atom split evenly over the
    /// `k` colours.
    pub fn lift(&self) -> Vec<(StarVector, f64)> {
        let share = 1.0 / self.k as f64;
        self.values
            .iter()
            .flat_map(|(x, w)| (0..self.k).map(move |c| (StarVector { value: x, colour: c, k: self.k }, w * share)))
            .collect()
    }

    /// Inverse of [`lift`](Self::lift): forget the colour.
    pub fn project(k: usize, atoms: impl IntoIterator<Item = (StarVector, f64)>) -> Result<Self> {
        Self::new(k, EmpiricalMeasure::from_weighted(atoms.into_iter().map(|(s, w)| (s.value, w)).collect())?)
    }
}
