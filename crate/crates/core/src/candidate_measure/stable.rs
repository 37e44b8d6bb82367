//! Normalised sums of the small-value law and their one-sided stable limit.
//!
//! The small-value law is the image of the tail under `y -> e^{-y}`, scaled
//! by `1/(k log k)` and cut below to mass one. In the `y` coordinate its mass
//! above a level `t` is `nu_r([M, -ln t]) / (k log k)`, so all thresholds
//! reduce to tail-mass root finding.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;


use super::params::CandidateParams;
use super::tail::{solve_upper, tail_shape, TailTable};
use crate::error::{invalid, Result};
use crate::numerics::{integrate, ks_against_cdf};
use crate::par::map_indexed;
use crate::population_dynamics::binomial;
use crate::rng::RngStream;

/// Exceedance level as a fraction of the normalising scale.
const SPLIT: f64 = 1e-3;

/// CDF of the one-sided 1/2-stable limit, `erfc(sqrt(pi / (4c)))`.
pub fn levy_cdf(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c == f64::INFINITY {
        return 1.0;
    }
    libm::erfc((std::f64::consts::PI / (4.0 * c)).sqrt())
}

/// Level `t_k` at which the small-value law has mass `1/k` above.
pub fn t_k_threshold(params: &CandidateParams, k: f64) -> Result<f64> {
    params.validate()?;
    if !(k >= 3.0) {
        return invalid(format!("need k >= 3, got {k}"));
    }
    Ok((-solve_upper(params.delta, params.big_m, k.ln() / params.gamma)?).exp())
}

/// `(gamma delta / (log k (log log k)^2))^{1/delta}`.
pub fn t_k_asymptotic(params: &CandidateParams, k: f64) -> f64 {
    let lk = k.ln();
    (params.gamma * params.delta / (lk * lk.ln().powi(2))).powf(1.0 / params.delta)
}

/// Precomputed pieces for sampling `(1/t_k) sum_{i<=k} U_i`.
#[derive(Clone, Debug)]
pub struct SmallValueSum {
    k: u64,
    t_k: f64,
    /// Probability that one `U` exceeds `SPLIT * t_k`.
    p_big: f64,
    /// `-ln` of the exceedance level; big values come from the tail on
    /// `[M, big_end]`.
    big: TailTable,
    /// Mean and variance of one `U` conditioned to be small.
    small_mean: f64,
    small_var: f64,
}

/// Summary of a stable-limit run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableLawReport {
    pub k: f64,
    pub n: usize,
    pub t_k: f64,
    pub t_k_asymptotic: f64,
    pub ks: f64,
}

impl SmallValueSum {
    pub fn new(params: &CandidateParams, k: u64) -> Result<Self> {
        params.validate()?;
        if k < 3 {
            return invalid(format!("need k >= 3, got {k}"));
        }
        let p = params;
        let kf = k as f64;
        let norm = kf * kf.ln();
        let t_end = solve_upper(p.delta, p.big_m, kf.ln() / p.gamma)?;
        let big_end = t_end - SPLIT.ln();
        let floor_end = solve_upper(p.delta, p.big_m, norm / p.gamma)?;
        if !(big_end < floor_end) {
            return invalid(format!("k = {k} too small to separate the exceedance level from the cut"));
        }
        let shape = |y: f64| p.gamma * tail_shape(p.delta, y);
        let big_mass = integrate(shape, p.big_m, big_end, 1e-12)?.value;
        let m1 = integrate(|y| (-y).exp() * shape(y), big_end, floor_end, 1e-12)?.value / norm;
        let m2 = integrate(|y| (-2.0 * y).exp() * shape(y), big_end, floor_end, 1e-12)?.value / norm;
        let p_big = big_mass / norm;
        let q = 1.0 - p_big;
        let small_mean = m1 / q;
        let small_var = (m2 / q - small_mean * small_mean).max(0.0);
        Ok(Self {
            k,
            t_k: (-t_end).exp(),
            p_big,
            big: TailTable::new(p.delta, p.big_m, big_end)?,
            small_mean,
            small_var,
        })
    }

    pub fn t_k(&self) -> f64 {
        self.t_k
    }

    /// One draw of the normalised sum: exact exceedances plus a Gaussian
    /// stand-in for the sum of the small values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n_big = binomial(self.k, self.p_big, rng);
        let big: f64 = (0..n_big).map(|_| (-self.big.sample(rng)).exp()).sum();
        let n_small = (self.k - n_big) as f64;
        let sd = (n_small * self.small_var).sqrt();
        let small = if sd > 0.0 {
            Normal::new(n_small * self.small_mean, sd).expect("finite moments").sample(rng)
        } else {
            n_small * self.small_mean
        };
        (big + small) / self.t_k
    }
}

/// KS distance between `n` normalised sums and the stable limit.
pub fn stable_law_test(params: &CandidateParams, k: u64, n: usize, stream: RngStream) -> Result<StableLawReport> {
    if n == 0 {
        return invalid("stable-law test needs at least one sample");
    }
    if params.delta != 0.5 {
        return invalid(format!("the closed-form limit needs delta = 1/2, got {}", params.delta));
    }
    let s = SmallValueSum::new(params, k)?;
    let mut xs = map_indexed(n, |i| s.sample(&mut stream.substream(i as u64).rng()));
    xs.sort_by(f64::total_cmp);
    Ok(StableLawReport {
        k: k as f64,
        n,
        t_k: s.t_k,
        t_k_asymptotic: t_k_asymptotic(params, k as f64),
        ks: ks_against_cdf(&xs, levy_cdf),
    })
}
