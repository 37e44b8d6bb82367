use rand::Rng;

use super::arrivals::thinned_arrivals;
use super::source::{EmpiricalSource, PhiSource};
use crate::error::Result;
use crate::par::map_indexed;
use crate::rng::RngStream;
use crate::star_measures::StarMeasure;
use crate::tree_model::OffspringLaw;

/// One draw of the reduced step at a colour-1 root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedSample {
    /// Top coordinate of the new belief, in `[1/k, 1]`.
    pub value: f64,
    /// Transform of `value`, computed from the scores without cancellation.
    pub phi: f64,
    /// Transform of the belief's colour-1 coordinate, floored at 0; never
    /// exceeds `phi`.
    pub w_lower: f64,
    /// Colour holding the top coordinate; 0 is the root's colour.
    pub colour: usize,
}

/// Turn scores into the new belief. `z1` is the root colour's score and
/// `others` the scores of the remaining colours (any colour left out is
/// treated as having score `+inf`). `tie_u` picks uniformly among tied
/// minima.
///
/// The sums are arranged so that `w_lower <= phi` holds in floating point,
/// not only in exact arithmetic: with `t1 <= 1` the quotient
/// `(1 + b) / t1` can never round below `t1 + b`.
pub fn finish_scores(z1: f64, others: &[f64], k: usize, tie_u: f64) -> ReducedSample {
    let zmin = others.iter().copied().fold(z1, f64::min);
    let mut ties: Vec<usize> = Vec::new();
    if z1 == zmin {
        ties.push(0);
    }
    ties.extend(others.iter().enumerate().filter(|(_, &z)| z == zmin).map(|(i, _)| i + 1));
    let colour = ties[((tie_u * ties.len() as f64) as usize).min(ties.len() - 1)];

    let (r, s) = if z1 == zmin {
        let s: f64 = others.iter().map(|&z| (-(z - z1)).exp()).sum();
        (s, s)
    } else {
        let j = ties[0] - 1;
        let t1 = (-(z1 - zmin)).exp();
        let b: f64 = others
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &z)| (-(z - zmin)).exp())
            .sum();
        (t1 + b, (1.0 + b) / t1)
    };
    let c = 1.0 / (k - 1) as f64;
    ReducedSample {
        value: 1.0 / (1.0 + r),
        phi: (1.0 / r - c).ln_1p().max(0.0),
        w_lower: (1.0 / s - c).ln_1p().max(0.0),
        colour,
    }
}

/// One sample of the top coordinate of the root belief after one step of
/// the recursion from `source`, at a root of colour 1.
pub fn reduced_step_sample<S: PhiSource, R: Rng + ?Sized>(source: &S, law: &OffspringLaw, rng: &mut R) -> ReducedSample {
    let k = source.k();
    let arr = thinned_arrivals(law, k, source.p_neq(), source.nonzero_eq(), source.nonzero_neq(), rng);
    let mut z1 = 0.0;
    for _ in 0..arr.first_neq {
        z1 += source.sample_neq(rng);
    }
    let mut others = vec![0.0f64; k - 1];
    for (m, z) in others.iter_mut().enumerate() {
        for _ in 0..arr.eq[m] {
            *z += source.sample_eq(rng);
        }
        for _ in 0..arr.neq[m] {
            *z += source.sample_neq(rng);
        }
    }
    let u = rng.random::<f64>();
    finish_scores(z1, &others, k, u)
}

/// `n` independent reduced samples, sample `i` drawn from `stream.substream(i)`.
pub fn reduced_step_sample_with<S: PhiSource>(source: &S, law: &OffspringLaw, n: usize, stream: RngStream) -> Vec<ReducedSample> {
    map_indexed(n, |i| reduced_step_sample(source, law, &mut stream.substream(i as u64).rng()))
}

/// Empirical one-step image of `pop` with `n` samples.
pub fn step_image(pop: &StarMeasure, law: &OffspringLaw, n: usize, stream: RngStream) -> Result<StarMeasure> {
    let src = EmpiricalSource::new(pop)?;
    let xs = reduced_step_sample_with(&src, law, n, stream).into_iter().map(|s| s.value).collect();
    StarMeasure::from_samples(pop.k(), xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star_measures::{EmpiricalMeasure, Transform};

    #[test]
    fn uniform_population_is_a_fixed_point() {
        for &k in &[3usize, 10, 100] {
            let src = EmpiricalSource::new(&StarMeasure::uniform(k)).unwrap();
            let law = OffspringLaw::Poisson { mean: 50.0 };
            let mut rng = RngStream::new(k as u64).rng();
            for _ in 0..200 {
                let s = reduced_step_sample(&src, &law, &mut rng);
                assert_eq!((s.value, s.phi, s.w_lower), (1.0 / k as f64, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn frozen_arrival_excludes_colour() {
        let s = finish_scores(0.0, &[f64::INFINITY, 0.0], 3, 0.0);
        assert_eq!(s.value, 0.5);
        let s = finish_scores(1.0, &[f64::INFINITY, f64::INFINITY], 3, 0.0);
        assert_eq!((s.value, s.phi, s.colour), (1.0, f64::INFINITY, 0));
    }

    #[test]
    fn phi_matches_transform_of_value() {
        let t = Transform::new(6);
        for &(z1, ref o) in &[(0.3, vec![0.1, 2.0, 0.0, 5.0, 1.0]), (4.0, vec![0.5, 0.5, 9.0, 0.0, 3.0])] {
            let s = finish_scores(z1, o, 6, 0.2);
            assert!((s.phi - t.forward(s.value)).abs() < 1e-12);
            let w = {
                let tot: f64 = o.iter().map(|z| (z1 - z).exp()).sum::<f64>() + 1.0;
                t.forward(1.0 / tot).max(0.0)
            };
            assert!((s.w_lower - w).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_holds_on_every_sample() {
        let k = 4;
        let pop = StarMeasure::new(
            k,
            EmpiricalMeasure::from_weighted(vec![(0.25, 0.2), (0.3, 0.2), (0.5, 0.2), (0.9, 0.2), (1.0, 0.2)]).unwrap(),
        )
        .unwrap();
        let src = EmpiricalSource::new(&pop).unwrap();
        for law in [OffspringLaw::Poisson { mean: 5.0 }, OffspringLaw::Deterministic { arity: 4 }] {
            for s in reduced_step_sample_with(&src, &law, 50_000, RngStream::new(1)) {
                assert!(s.phi >= s.w_lower);
            }
        }
    }

    #[test]
    fn tie_break_is_uniform() {
        let mut counts = [0u32; 3];
        for i in 0..3000 {
            counts[finish_scores(0.0, &[0.0, 0.0], 3, (i as f64 + 0.5) / 3000.0).colour] += 1;
        }
        assert_eq!(counts, [1000, 1000, 1000]);
    }
}
