//! Compound-Poisson comparison variables used in the dominance argument.

use rand::Rng;
use serde::Serialize;

use super::family::NuFamily;
use super::params::CandidateParams;
use super::tail::{sample_mismatch, solve_upper, TailTable};
use crate::error::{ReconError, Result};
use crate::rng::RngStream;
use crate::tree_model::poisson;

/// Samplers of the lower-bound pieces, for one candidate and one degree.
#[derive(Clone, Debug)]
pub struct CompoundSamplers<'a> {
    family: &'a NuFamily,
    scaled_degree: f64,
    /// Tail normalised on the range that gives the bulk part mass one.
    bulk_tail: TailTable,
    /// Tail on the range that closes the mixture of the log-sum law.
    sum_tail: TailTable,
    sum_tail_mass: f64,
}

impl<'a> CompoundSamplers<'a> {
    pub fn new(family: &'a NuFamily) -> Result<Self> {
        let p = *family.params();
        let k = family.colours();
        let lk = family.log_k();
        let dd = p.scaled_degree(k);
        let bulk_rate = dd - 1.0 - p.gamma;
        if !(bulk_rate > 0.0) {
            return Err(ReconError::InvalidParameter(format!("D - 1 - gamma = {bulk_rate} is not positive")));
        }
        // Rate D-1-gamma of draws from (1+gamma)/(D-1-gamma) times the tail,
        // cut above to mass one.
        let bulk_end = solve_upper(p.delta, p.big_m, bulk_rate / ((1.0 + p.gamma) * p.gamma))?;
        let lift = (p.gamma + 1.0 - p.beta).exp();
        let sum_tail_mass = ((lk - p.eps) / lift - 1.0) / ((1.0 + p.eps) * p.c_z(k));
        if !(sum_tail_mass > 0.0) {
            return Err(ReconError::InvalidParameter(format!(
                "log-sum mixture has no room for its tail at k = {k} (mass deficit {sum_tail_mass})"
            )));
        }
        let sum_end = solve_upper(p.delta, p.big_m, sum_tail_mass / p.gamma)?;
        Ok(Self {
            family,
            scaled_degree: dd,
            bulk_tail: TailTable::new(p.delta, p.big_m, bulk_end)?,
            sum_tail: TailTable::new(p.delta, p.big_m, sum_end)?,
            sum_tail_mass,
        })
    }

    fn params(&self) -> &CandidateParams {
        self.family.params()
    }

    pub fn scaled_degree(&self) -> f64 {
        self.scaled_degree
    }

    /// Upper end of the tail used by [`Self::sample_s0`].
    pub fn bulk_end(&self) -> f64 {
        self.bulk_tail.range().1
    }

    /// `Pois(D - 1 - gamma)` draws from the tail normalised on `(M, bulk_end]`.
    pub fn sample_s0<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = self.params();
        let n = poisson(self.scaled_degree - 1.0 - p.gamma, rng);
        (0..n).map(|_| self.bulk_tail.sample(rng)).sum()
    }

    /// `alpha` times a `Pois(kappa)` count.
    pub fn sample_s1<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        poisson(self.params().kappa, rng) as f64 * self.family.alpha()
    }

    /// `Pois(kappa/2)` copies of `alpha` plus `Pois(gamma p_r)` draws from
    /// the mismatch-tilted tail on `(M, inf)`.
    pub fn sample_z1_tilde<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = self.params();
        let atoms = poisson(0.5 * p.kappa, rng) as f64 * self.family.alpha();
        let n = poisson(p.gamma * self.family.p_r_neq(), rng);
        let k = self.family.colours();
        atoms + (0..n).map(|_| sample_mismatch(p.delta, k, p.big_m, f64::INFINITY, rng)).sum::<f64>()
    }

    /// Weights `(minus infinity, shifted atoms, tail)` of the log-sum mixture.
    pub fn v_weights(&self) -> (f64, f64, f64) {
        let p = self.params();
        let k = self.family.colours();
        let lk = self.family.log_k();
        let lift = (p.gamma + 1.0 - p.beta).exp() / lk;
        (p.eps / lk, lift, lift * (1.0 + p.eps) * p.c_z(k) * self.sum_tail_mass)
    }

    /// Draw from the lower bound of `-log sum_{m>=2} e^{-Z_m}`.
    pub fn sample_v_tilde<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (w_inf, w_atoms, _) = self.v_weights();
        let u = rng.random::<f64>();
        if u < w_inf {
            f64::NEG_INFINITY
        } else if u < w_inf + w_atoms {
            let s1 = self.sample_s1(rng);
            -((-s1).exp() + self.params().sigma).ln()
        } else {
            self.sum_tail.sample(rng)
        }
    }

    /// `V~ - Z~_1`.
    pub fn sample_w0_tilde<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = self.sample_v_tilde(rng);
        v - self.sample_z1_tilde(rng)
    }
}

/// Outcome of the one-sided comparison between the bulk part and its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BulkBoundCheck {
    pub k: usize,
    pub n: usize,
    pub nonzero: usize,
    /// Fitted constant multiplying `gamma` in the bound.
    pub c_m: f64,
    /// Upper end of the bound's tail.
    pub bound_end: f64,
    /// `sup_x (F_bulk(x) - F_bound(x))` over the nonzero draws.
    pub excess: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Compare the nonzero part of the bulk variable with the nonzero part of
/// `(e^{gamma+1-beta}/(k log k)) (delta_0 + (1 + C_M gamma) nu_r)`, the latter
/// cut to mass one. The bound must sit below: its CDF may not fall under the
/// empirical CDF by more than the one-sided KS tolerance at level 0.001.
pub fn check_bulk_bound(samplers: &CompoundSamplers<'_>, n: usize, stream: RngStream) -> Result<BulkBoundCheck> {
    let p = *samplers.params();
    let k = samplers.family.colours();
    let lk = samplers.family.log_k();
    let c_m = p.fitted_c_m();
    let top = k as f64 * lk * (-(p.gamma + 1.0 - p.beta)).exp() - 1.0;
    let bound_end = solve_upper(p.delta, p.big_m, top / ((1.0 + c_m * p.gamma) * p.gamma))?;
    let bound = TailTable::new(p.delta, p.big_m, bound_end)?;
    let draws = crate::par::map_indexed(n, |i| samplers.sample_s0(&mut stream.substream(i as u64).rng()));
    let mut xs: Vec<f64> = draws.into_iter().filter(|&x| x > 0.0).collect();
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    let mut excess = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        excess = excess.max((i + 1) as f64 / m as f64 - bound.cdf(x));
    }
    // One-sided critical value: sqrt(ln(1/alpha) / (2m)).
    let tolerance = if m > 0 { ((1.0f64 / 1e-3).ln() / (2.0 * m as f64)).sqrt() } else { 1.0 };
    Ok(BulkBoundCheck { k, n, nonzero: m, c_m, bound_end, excess, tolerance, holds: m > 0 && excess <= tolerance })
}
