//! Stratified sampler of `W` for Poisson trees with many colours.
//!
//! A draw of the reduced step needs the scores of all `k - 1` non-root
//! colours, but only colours with few tail arrivals can matter: every tail
//! arrival adds at least `M`. Colours are therefore grouped by their tail
//! count `j = 0, 1, 2, ...`; group sizes are drawn by sequential binomials and
//! only the groups whose best-case contribution is not negligible are
//! materialised. The rest enter as score `+inf`.

use rand::Rng;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::family::NuFamily;
use crate::par::map_indexed;
use crate::population_dynamics::{binomial, finish_scores};
use crate::rng::{RngStream, StreamRng};
use crate::tree_model::poisson;

/// Relative size, in log units, below which colours are dropped. With the
/// colour count added to the cut, everything dropped together stays under
/// `e^{-36}` of the kept sum, below one rounding unit.
const NEGLIGIBLE: f64 = 36.0;

/// Poisson arrivals into one score: atoms with their rates plus a tail of
/// total rate `tail_rate` whose values are at least `tail_floor`.
struct Channel<'a> {
    atoms: Vec<(f64, f64)>,
    tail_rate: f64,
    tail_floor: f64,
    tail: Option<&'a (dyn Fn(&mut StreamRng) -> f64 + Sync)>,
}

impl Channel<'_> {
    fn atom_part(&self, rng: &mut StreamRng) -> f64 {
        self.atoms.iter().map(|&(y, rate)| if y == 0.0 { 0.0 } else { poisson(rate, rng) as f64 * y }).sum()
    }

    fn tail_part(&self, count: u64, rng: &mut StreamRng) -> f64 {
        self.tail_part_until(count, f64::INFINITY, 0.0, rng)
    }

    /// `start` plus `count` tail draws, abandoned as `+inf` once past `cut`.
    fn tail_part_until(&self, count: u64, cut: f64, start: f64, rng: &mut StreamRng) -> f64 {
        if count == 0 {
            return start;
        }
        let draw = self.tail.expect("tail arrivals need a sampler");
        let mut z = start;
        for _ in 0..count {
            if z >= cut {
                return f64::INFINITY;
            }
            z += draw(rng);
        }
        z
    }
}

/// Sampler of `W = log[(k-2)/(k-1) + 1/sum_{m>=2} e^{Z_1 - Z_m}] v 0`.
pub struct ScoreEngine<'a> {
    k: usize,
    root: Channel<'a>,
    other: Channel<'a>,
    /// `P(J = j | J >= j)` for the per-colour tail count `J`.
    stay: Vec<f64>,
}

fn conditional_stay(rate: f64) -> Vec<f64> {
    if rate <= 0.0 {
        return vec![1.0];
    }
    let mut out = Vec::new();
    for j in 0.. {
        let log_pmf = -rate + j as f64 * rate.ln() - ln_gamma(j as f64 + 1.0);
        let tail = if j == 0 { 1.0 } else { gamma_lr(j as f64, rate) };
        if tail < 1e-300 || !(tail > 0.0) {
            out.push(1.0);
            break;
        }
        out.push((log_pmf.exp() / tail).min(1.0));
        if out.len() > 10_000 {
            out.push(1.0);
            break;
        }
    }
    out
}

impl<'a> ScoreEngine<'a> {
    fn new(k: usize, root: Channel<'a>, other: Channel<'a>) -> Self {
        let stay = conditional_stay(other.tail_rate);
        Self { k, root, other, stay }
    }

    /// One draw of `W` from `rng`.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let z1 = self.root.atom_part(rng) + {
            let n = poisson(self.root.tail_rate, rng);
            if n > 0 { self.root.tail_part(n, rng) } else { 0.0 }
        };
        let mut left = (self.k - 1) as u64;
        let slack = NEGLIGIBLE + (self.k as f64).ln();
        let mut scores: Vec<f64> = Vec::new();
        let (mut zmin, mut acc) = (f64::INFINITY, 0.0f64);
        for (j, &p) in self.stay.iter().enumerate() {
            if left == 0 {
                break;
            }
            let mut cut = if acc > 0.0 { zmin - acc.ln() + slack } else { f64::INFINITY };
            if j as f64 * self.other.tail_floor >= cut {
                break;
            }
            let nj = if p >= 1.0 { left } else { binomial(left, p, rng) };
            left -= nj;
            for _ in 0..nj {
                let a = self.other.atom_part(rng);
                let z = self.other.tail_part_until(j as u64, cut, a, rng);
                if z == f64::INFINITY {
                    continue;
                }
                if z < zmin {
                    acc = acc * (z - zmin).exp() + 1.0;
                    zmin = z;
                } else {
                    acc += (-(z - zmin)).exp();
                }
                scores.push(z);
                cut = zmin - acc.ln() + slack;
            }
        }
        let u = rng.random::<f64>();
        finish_scores(z1, &scores, self.k, u).w_lower
    }

    /// `n` draws, draw `i` from `stream.substream(i)`.
    pub fn sample_many(&self, n: usize, stream: RngStream) -> Vec<f64> {
        map_indexed(n, |i| self.sample(&mut stream.substream(i as u64).rng()))
    }
}

/// Engine driven by the candidate at mean degree `d = D (k-1)`.
pub fn candidate_engine<'a>(
    family: &'a NuFamily,
    scaled_degree: f64,
    root_tail: &'a (dyn Fn(&mut StreamRng) -> f64 + Sync),
    other_tail: &'a (dyn Fn(&mut StreamRng) -> f64 + Sync),
) -> ScoreEngine<'a> {
    let k = family.colours();
    let p = family.params();
    let t = family.transform();
    let c = 1.0 / (k - 1) as f64;
    let lk = family.log_k();
    let dd = scaled_degree;
    let mis_alpha = t.inverse_complement(family.alpha());
    let (tail_match, tail_mismatch) = family.tail_split();
    let root = Channel {
        atoms: vec![(family.alpha(), dd * (1.0 - p.kappa) * mis_alpha / lk)],
        tail_rate: dd * p.gamma * tail_mismatch / lk,
        tail_floor: p.big_m,
        tail: Some(root_tail),
    };
    let other = Channel {
        atoms: vec![(family.alpha(), dd * (1.0 - p.kappa) * (1.0 - c * mis_alpha) / lk)],
        tail_rate: dd * p.gamma * (tail_match + tail_mismatch * (1.0 - c)) / lk,
        tail_floor: p.big_m,
        tail: Some(other_tail),
    };
    ScoreEngine::new(k, root, other)
}

/// Engine for a purely atomic law: `atoms` are `(value, weight)` pairs of the
/// candidate, each with its match / mismatch split through the transform.
pub fn atomic_engine(k: usize, scaled_degree: f64, atoms: &[(f64, f64)]) -> ScoreEngine<'static> {
    let t = crate::star_measures::Transform::new(k);
    let c = 1.0 / (k - 1) as f64;
    let root = Channel {
        atoms: atoms.iter().map(|&(y, w)| (y, scaled_degree * w * t.inverse_complement(y))).collect(),
        tail_rate: 0.0,
        tail_floor: 0.0,
        tail: None,
    };
    let other = Channel {
        atoms: atoms.iter().map(|&(y, w)| (y, scaled_degree * w * (1.0 - c * t.inverse_complement(y)))).collect(),
        tail_rate: 0.0,
        tail_floor: 0.0,
        tail: None,
    };
    ScoreEngine::new(k, root, other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate_measure::{build_candidate, CandidateParams};
    use crate::population_dynamics::reduced_step_sample_with;
    use crate::star_measures::{ks_distance, EmpiricalMeasure};
    use crate::tree_model::OffspringLaw;

    #[test]
    fn stay_probabilities_reconstruct_the_pmf() {
        let s = conditional_stay(3.0);
        let mut left = 1.0;
        for (j, &p) in s.iter().enumerate().take(10) {
            let pmf = (-3.0f64).exp() * 3f64.powi(j as i32) / (1..=j).map(|i| i as f64).product::<f64>();
            assert!((left * p - pmf).abs() < 1e-14, "j={j}");
            left *= 1.0 - p;
        }
    }

    #[test]
    fn zero_atom_gives_zero() {
        let e = atomic_engine(10_000, 12.0, &[(0.0, 1.0)]);
        let ws = e.sample_many(50, RngStream::new(2));
        assert!(ws.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn agrees_with_reduced_step() {
        let p = CandidateParams::default();
        for &k in &[12usize, 40] {
            let fam = build_candidate(&p, k).unwrap();
            let dd = p.scaled_degree(k);
            let rt = |r: &mut StreamRng| fam.sample_root_tail(r);
            let ot = |r: &mut StreamRng| fam.sample_other_tail(r);
            let eng = candidate_engine(&fam, dd, &rt, &ot);
            let n = 40_000;
            let a = eng.sample_many(n, RngStream::new(10));
            let law = OffspringLaw::Poisson { mean: p.degree(k) };
            let b: Vec<f64> =
                reduced_step_sample_with(&fam, &law, n, RngStream::new(11)).into_iter().map(|s| s.w_lower).collect();
            let snap = |v: Vec<f64>| v.into_iter().map(|x| (x * 1e12).round() / 1e12).collect::<Vec<_>>();
            let ea = EmpiricalMeasure::from_samples(snap(a)).unwrap();
            let eb = EmpiricalMeasure::from_samples(snap(b)).unwrap();
            let ks = ks_distance(&ea, &eb);
            // Two-sample bound at the 0.001 level.
            assert!(ks <= 1.95 * (2.0 / n as f64).sqrt(), "k={k}: ks {ks}");
        }
    }
}
