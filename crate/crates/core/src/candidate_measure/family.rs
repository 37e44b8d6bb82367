use rand::Rng;
use serde::Serialize;

use super::params::CandidateParams;
use super::tail::{mismatch_shape, sample_mismatch, shape_integral, shape_integral_simpson, solve_upper, tail_shape, TailTable};
use crate::error::{invalid, ReconError, Result};
use crate::numerics::{integrate, integrate_simpson};
use crate::population_dynamics::PhiSource;
use crate::star_measures::Transform;

/// Which normalised piece of the candidate to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuPart {
    /// The continuous tail alone, on `(M, a_k]`.
    Tail,
    /// The candidate itself.
    Full,
    /// The candidate tilted by the colour-match weight.
    Match,
    /// The candidate tilted by the colour-mismatch weight.
    Mismatch,
}

/// Scalar summary of a built candidate, for reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub k: usize,
    pub alpha: f64,
    pub a_k: f64,
    pub p_r_neq: f64,
    pub p_k_neq: f64,
    pub c_m: f64,
    pub c_z: f64,
}

/// The candidate law on the transformed line: atoms at 0 and `alpha` plus the
/// tail `gamma e^{delta y}/y^2` on `(M, a_k]`, all scaled by `1/log k`.
#[derive(Clone, Debug)]
pub struct NuFamily {
    params: CandidateParams,
    k: usize,
    log_k: f64,
    transform: Transform,
    alpha: f64,
    a_k: f64,
    p_r_neq: f64,
    /// Tail integrals of the shape weighted by the match / mismatch factor.
    tail_match: f64,
    tail_mismatch: f64,
    p_neq: f64,
    tail: TailTable,
}

/// Build the candidate for `k` colours. With `cross_check`, every integral is
/// recomputed with adaptive Simpson and must agree to `1e-8` relative.
pub fn build_candidate(params: &CandidateParams, k: usize) -> Result<NuFamily> {
    NuFamily::build(params, k, false)
}

pub fn build_candidate_checked(params: &CandidateParams, k: usize) -> Result<NuFamily> {
    NuFamily::build(params, k, true)
}

fn agree(name: &str, a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-8 * a.abs().max(b.abs()).max(1e-300) {
        return Err(ReconError::Numerical(format!("{name}: quadrature rules disagree ({a} vs {b})")));
    }
    Ok(())
}

/// `integral_M^inf e^{delta y} / (y^2 (e^y + 1/(k-1))) dy`.
pub fn tail_mismatch_weight(delta: f64, m: f64, k: usize) -> Result<f64> {
    Ok(integrate(|y| mismatch_shape(delta, k, y), m, f64::INFINITY, 1e-12)?.value)
}

impl NuFamily {
    fn build(params: &CandidateParams, k: usize, cross_check: bool) -> Result<Self> {
        params.validate()?;
        if k < 3 {
            return invalid(format!("candidate needs k >= 3, got {k}"));
        }
        let p = *params;
        let transform = Transform::new(k);
        let log_k = (k as f64).ln();
        let alpha = p.alpha(k);
        let deficit = log_k - 1.0;
        if !(deficit > 0.0) {
            return Err(ReconError::InvalidParameter(format!(
                "atoms alone carry mass 1/log k = {} > 1 at k = {k}; mass deficit {deficit}",
                1.0 / log_k
            )));
        }
        let a_k = solve_upper(p.delta, p.big_m, deficit / p.gamma)?;
        let p_r_neq = tail_mismatch_weight(p.delta, p.big_m, k)?;
        let tail_mismatch = integrate(|y| mismatch_shape(p.delta, k, y), p.big_m, a_k, 1e-12)?.value;
        let tail_all = shape_integral(p.delta, p.big_m, a_k)?;
        let tail_match = tail_all - tail_mismatch;
        if cross_check {
            agree("tail mass", tail_all, shape_integral_simpson(p.delta, p.big_m, a_k))?;
            agree("tail mass condition", p.gamma * tail_all, deficit)?;
            // The mismatch density decays like e^{-(1-delta) y}; 200 units
            // past M leave nothing representable.
            let far = p.big_m + 200.0;
            agree("p_r_neq", p_r_neq, integrate_simpson(|y| mismatch_shape(p.delta, k, y), p.big_m, far, 1e-15))?;
            agree(
                "tail mismatch",
                tail_mismatch,
                integrate_simpson(|y| mismatch_shape(p.delta, k, y), p.big_m, a_k, 1e-15),
            )?;
        }
        let p_neq = (p.kappa * (1.0 - 1.0 / k as f64)
            + (1.0 - p.kappa) * transform.inverse_complement(alpha)
            + p.gamma * tail_mismatch)
            / log_k;
        let tail = TailTable::new(p.delta, p.big_m, a_k)?;
        Ok(Self { params: p, k, log_k, transform, alpha, a_k, p_r_neq, tail_match, tail_mismatch, p_neq, tail })
    }

    pub fn params(&self) -> &CandidateParams {
        &self.params
    }

    pub fn colours(&self) -> usize {
        self.k
    }

    pub fn log_k(&self) -> f64 {
        self.log_k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a_k(&self) -> f64 {
        self.a_k
    }

    /// `integral_M^inf e^{delta y}/(y^2 (e^y + 1/(k-1))) dy`.
    pub fn p_r_neq(&self) -> f64 {
        self.p_r_neq
    }

    /// Mass of the mismatch tilt of the candidate.
    pub fn p_k_neq(&self) -> f64 {
        self.p_neq
    }

    pub fn tail_table(&self) -> &TailTable {
        &self.tail
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn summary(&self) -> CandidateSummary {
        CandidateSummary {
            k: self.k,
            alpha: self.alpha,
            a_k: self.a_k,
            p_r_neq: self.p_r_neq,
            p_k_neq: self.p_neq,
            c_m: self.params.fitted_c_m(),
            c_z: self.params.c_z(self.k),
        }
    }

    /// Weights `(atom at 0, atom at alpha, tail)` of the candidate.
    pub fn part_masses(&self) -> (f64, f64, f64) {
        let p = &self.params;
        (p.kappa / self.log_k, (1.0 - p.kappa) / self.log_k, p.gamma * (self.tail_match + self.tail_mismatch) / self.log_k)
    }

    pub fn mass(&self) -> f64 {
        let (a, b, c) = self.part_masses();
        a + b + c
    }

    /// CDF of the candidate.
    pub fn cdf(&self, y: f64) -> f64 {
        let (a0, aa, t) = self.part_masses();
        if y < 0.0 {
            return 0.0;
        }
        let mut f = a0;
        if y >= self.alpha {
            f += aa;
        }
        if y > self.params.big_m {
            f += t * self.tail.cdf(y);
        }
        f.min(1.0)
    }

    /// Weights `(atom at alpha, tail)` of the match tilt, excluding the atom at 0.
    fn match_nonzero(&self) -> (f64, f64) {
        let p = &self.params;
        ((1.0 - p.kappa) * self.transform.inverse(self.alpha), p.gamma * self.tail_match)
    }

    fn mismatch_nonzero(&self) -> (f64, f64) {
        let p = &self.params;
        ((1.0 - p.kappa) * self.transform.inverse_complement(self.alpha), p.gamma * self.tail_mismatch)
    }

    /// Tail draw weighted by the match factor, by rejection from the table.
    fn sample_match_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let y = self.tail.sample(rng);
            if rng.random::<f64>() < self.transform.inverse(y) {
                return y;
            }
        }
    }

    fn sample_mismatch_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_mismatch(self.params.delta, self.k, self.params.big_m, self.a_k, rng)
    }

    /// Tail draw weighted by `1 - (1 - inverse(y))/(k-1)`: the combined law of
    /// the arrivals at a colour other than the root's.
    pub(crate) fn sample_other_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = 1.0 / (self.k - 1) as f64;
        loop {
            let y = self.tail.sample(rng);
            if rng.random::<f64>() < 1.0 - c * self.transform.inverse_complement(y) {
                return y;
            }
        }
    }

    pub(crate) fn sample_root_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_mismatch_tail(rng)
    }

    /// Tail integrals `(match, mismatch)` of the unscaled shape on `[M, a_k]`.
    pub(crate) fn tail_split(&self) -> (f64, f64) {
        (self.tail_match, self.tail_mismatch)
    }

    pub fn sample_nu<R: Rng + ?Sized>(&self, part: NuPart, rng: &mut R) -> f64 {
        match part {
            NuPart::Tail => self.tail.sample(rng),
            NuPart::Full => {
                let (a0, aa, _) = self.part_masses();
                let u = rng.random::<f64>();
                if u < a0 {
                    0.0
                } else if u < a0 + aa {
                    self.alpha
                } else {
                    self.tail.sample(rng)
                }
            }
            NuPart::Match => {
                let zero = self.params.kappa / self.k as f64;
                let (a, t) = self.match_nonzero();
                if rng.random::<f64>() * (zero + a + t) < zero {
                    0.0
                } else {
                    self.sample_eq(rng)
                }
            }
            NuPart::Mismatch => {
                let zero = self.params.kappa * (1.0 - 1.0 / self.k as f64);
                let (a, t) = self.mismatch_nonzero();
                if rng.random::<f64>() * (zero + a + t) < zero {
                    0.0
                } else {
                    self.sample_neq(rng)
                }
            }
        }
    }
}

impl PhiSource for NuFamily {
    fn k(&self) -> usize {
        self.k
    }

    fn p_neq(&self) -> f64 {
        self.p_neq
    }

    fn nonzero_eq(&self) -> f64 {
        let (a, t) = self.match_nonzero();
        ((a + t) / self.log_k / (1.0 - self.p_neq)).min(1.0)
    }

    fn nonzero_neq(&self) -> f64 {
        let (a, t) = self.mismatch_nonzero();
        ((a + t) / self.log_k / self.p_neq).min(1.0)
    }

    fn sample_eq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, t) = self.match_nonzero();
        if rng.random::<f64>() * (a + t) < a {
            self.alpha
        } else {
            self.sample_match_tail(rng)
        }
    }

    fn sample_neq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, t) = self.mismatch_nonzero();
        if rng.random::<f64>() * (a + t) < a {
            self.alpha
        } else {
            self.sample_mismatch_tail(rng)
        }
    }
}

/// Unscaled tail shape, exposed for oracles in tests.
pub fn candidate_tail_shape(params: &CandidateParams, y: f64) -> f64 {
    if y > params.big_m {
        params.gamma * tail_shape(params.delta, y)
    } else {
        0.0
    }
}
