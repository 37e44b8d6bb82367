//! Target measures for the reductions and the root-belief experiment.

use serde::Serialize;
use statrs::function::gamma::gamma_lr;

use super::run::{dominance_excess, run_alice, sample_instance, Reductions};
use crate::error::{invalid, ReconError, Result};
use crate::par::try_map_indexed;
use crate::population_dynamics::step_image;
use crate::rng::RngStream;
use crate::star_measures::StarMeasure;
use crate::tree_model::OffspringLaw;

/// `(1 - theta) delta_{1/k} + theta * (step image)^{n_iter}(frozen)`, kept
/// only if one more step image dominates it within `3/sqrt(n)`.
pub fn find_dominated(
    k: usize,
    law: &OffspringLaw,
    theta: f64,
    n_iter: usize,
    n: usize,
    stream: RngStream,
) -> Result<StarMeasure> {
    if !(0.0..=1.0).contains(&theta) {
        return invalid(format!("theta = {theta} outside [0, 1]"));
    }
    if n == 0 {
        return invalid("need at least one sample");
    }
    let uniform = StarMeasure::uniform(k);
    let mu = if theta == 0.0 {
        uniform
    } else {
        let mut it = StarMeasure::frozen(k);
        let iter_stream = stream.labelled("iterate");
        for g in 0..n_iter {
            it = step_image(&it, law, n, iter_stream.substream(g as u64))?;
        }
        if theta == 1.0 { it } else { uniform.mix(theta, &it)? }
    };
    let image = step_image(&mu, law, n, stream.labelled("check"))?;
    let excess = dominance_excess(&image, &mu);
    let slack = 3.0 / (n as f64).sqrt();
    if excess > slack {
        return Err(ReconError::NotDominated(format!(
            "image falls below the mixture by {excess:.4} > {slack:.4}; try a larger degree or a smaller theta"
        )));
    }
    Ok(mu)
}

/// Total-variation cost of keeping only `Pois(d')`-many children of a
/// `d`-ary node, next to the level `c / (k log k)` it has to beat.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationBound {
    /// `P(Pois(d') > d)`.
    pub tail: f64,
    pub comparator: f64,
}

pub fn truncation_tv_bound(d_prime: f64, d: u64, k: usize, c: f64) -> Result<TruncationBound> {
    if !(d_prime >= 0.0) || d_prime > d as f64 {
        return invalid(format!("need 0 <= d' <= d, got d' = {d_prime}, d = {d}"));
    }
    if k < 3 {
        return invalid(format!("k = {k} < 3"));
    }
    let tail = if d_prime == 0.0 { 0.0 } else { gamma_lr((d + 1) as f64, d_prime) };
    let kf = k as f64;
    Ok(TruncationBound { tail, comparator: c / (kf * kf.ln()) })
}

/// Settings of the root-belief experiment.
#[derive(Clone, Debug)]
pub struct RootExperiment {
    pub k: usize,
    pub law: OffspringLaw,
    /// Law of the number of children kept, for the regular-tree variant.
    pub keep: Option<OffspringLaw>,
    pub depth: u32,
    pub runs: usize,
}

/// Top coordinate of Bob's root belief over `runs` independent trees,
/// run `i` drawn from `stream.substream(i)`.
pub fn root_top_values(exp: &RootExperiment, red: &Reductions, stream: RngStream) -> Result<Vec<f64>> {
    try_map_indexed(exp.runs, |i| {
        let inst = sample_instance(exp.k, &exp.law, exp.depth, exp.keep.as_ref(), stream.substream(i as u64))?;
        Ok(run_alice(&inst, red, false)?.top)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn zero_theta_is_the_uniform_point() {
        let law = OffspringLaw::Poisson { mean: 5.0 };
        let mu = find_dominated(4, &law, 0.0, 3, 500, RngStream::new(1)).unwrap();
        assert_eq!(mu, StarMeasure::uniform(4));
    }

    #[test]
    fn subcritical_degree_fails() {
        let law = OffspringLaw::Poisson { mean: 1.0 };
        let r = find_dominated(3, &law, 0.9, 2, 4000, RngStream::new(2));
        assert!(matches!(r, Err(ReconError::NotDominated(_))), "{r:?}");
    }

    #[test]
    fn frozen_regime_succeeds() {
        let law = OffspringLaw::Poisson { mean: 20.0 };
        assert!(find_dominated(3, &law, 1.0, 30, 4000, RngStream::new(3)).is_ok());
    }

    #[test]
    fn bad_theta_rejected() {
        let law = OffspringLaw::Poisson { mean: 5.0 };
        assert!(find_dominated(3, &law, 1.5, 1, 10, RngStream::new(1)).is_err());
    }

    #[test]
    fn tail_at_the_mean_is_near_half() {
        let b = truncation_tv_bound(100.0, 100, 10, 1.0).unwrap();
        assert!(b.tail > 0.4 && b.tail < 0.55, "{}", b.tail);
    }

    #[test]
    fn tail_five_sd_below_matches_direct_sum() {
        let d = 10_000u64;
        let dp = d as f64 - 5.0 * (d as f64).sqrt();
        let b = truncation_tv_bound(dp, d, 10, 1.0).unwrap();
        let direct: f64 = ((d + 1)..(d + 2000))
            .map(|j| (-dp + j as f64 * dp.ln() - ln_gamma(j as f64 + 1.0)).exp())
            .sum();
        assert!(b.tail <= 1e-6);
        assert!((b.tail - direct).abs() <= 1e-6 * direct, "{} vs {direct}", b.tail);
    }

    #[test]
    fn empty_tree_has_no_tail() {
        let b = truncation_tv_bound(0.0, 0, 3, 2.0).unwrap();
        assert_eq!(b.tail, 0.0);
        assert!((b.comparator - 2.0 / (3.0 * 3f64.ln())).abs() < 1e-15);
        assert!(truncation_tv_bound(5.0, 4, 3, 1.0).is_err());
    }
}
