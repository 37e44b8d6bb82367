use rand::Rng;

use crate::error::{ReconError, Result};
use crate::star_measures::{EmpiricalMeasure, StarMeasure, Transform};

/// Split a star measure into its two tilts: `x mu(dx)` and `(1 - x) mu(dx)`,
/// each normalised, plus the mass `p_neq` of the second. The second tilt is
/// `None` when that mass is zero.
pub fn tilt_split(pop: &StarMeasure) -> Result<(EmpiricalMeasure, Option<EmpiricalMeasure>, f64)> {
    let v = pop.values().normalised()?;
    let p_neq: f64 = v.iter().map(|(x, w)| (1.0 - x) * w).sum();
    let eq = EmpiricalMeasure::from_weighted(v.iter().map(|(x, w)| (x, x * w)).collect())?.normalised()?;
    let neq = if p_neq > 0.0 {
        Some(EmpiricalMeasure::from_weighted(v.iter().map(|(x, w)| (x, (1.0 - x) * w)).collect())?.normalised()?)
    } else {
        None
    };
    Ok((eq, neq, p_neq))
}

/// Source of child contributions for the reduced step: the two tilted laws
/// pushed through the transform, with their zero atoms split off so that
/// arrivals contributing nothing can be thinned away.
pub trait PhiSource: Sync {
    fn k(&self) -> usize;
    /// Mass of the `(1 - x)` tilt.
    fn p_neq(&self) -> f64;
    /// Probability that a draw from the `x` tilt is non-zero after the transform.
    fn nonzero_eq(&self) -> f64;
    /// Same for the `(1 - x)` tilt.
    fn nonzero_neq(&self) -> f64;
    /// Transformed draw from the `x` tilt conditioned on being non-zero.
    fn sample_eq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
    /// Transformed draw from the `(1 - x)` tilt conditioned on being non-zero.
    fn sample_neq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// [`PhiSource`] backed by the atoms of a star measure.
#[derive(Clone, Debug)]
pub struct EmpiricalSource {
    k: usize,
    p_neq: f64,
    phi: Vec<f64>,
    cum_eq: Vec<f64>,
    cum_neq: Vec<f64>,
    nz_eq: f64,
    nz_neq: f64,
}

impl EmpiricalSource {
    pub fn new(pop: &StarMeasure) -> Result<Self> {
        let k = pop.k();
        let t = Transform::new(k);
        let v = pop.values().normalised()?;
        let p_neq: f64 = v.iter().map(|(x, w)| (1.0 - x) * w).sum();
        let (mut phi, mut cum_eq, mut cum_neq) = (Vec::new(), Vec::new(), Vec::new());
        let (mut a, mut b) = (0.0, 0.0);
        for (x, w) in v.iter() {
            let y = t.forward(x);
            if y > 0.0 {
                a += x * w;
                b += (1.0 - x) * w;
                phi.push(y);
                cum_eq.push(a);
                cum_neq.push(b);
            }
        }
        if !(1.0 - p_neq > 0.0) {
            return Err(ReconError::InvalidMeasure("population has no mass on the x tilt".into()));
        }
        Ok(Self {
            k,
            p_neq,
            phi,
            nz_eq: (a / (1.0 - p_neq)).min(1.0),
            nz_neq: if p_neq > 0.0 { (b / p_neq).min(1.0) } else { 0.0 },
            cum_eq,
            cum_neq,
        })
    }

    fn pick<R: Rng + ?Sized>(&self, cum: &[f64], rng: &mut R) -> f64 {
        let total = *cum.last().expect("sampled only when non-zero mass exists");
        let u = rng.random::<f64>() * total;
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.phi[i]
    }
}

impl PhiSource for EmpiricalSource {
    fn k(&self) -> usize {
        self.k
    }
    fn p_neq(&self) -> f64 {
        self.p_neq
    }
    fn nonzero_eq(&self) -> f64 {
        self.nz_eq
    }
    fn nonzero_neq(&self) -> f64 {
        self.nz_neq
    }
    fn sample_eq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.pick(&self.cum_eq, rng)
    }
    fn sample_neq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.pick(&self.cum_neq, rng)
    }
}
