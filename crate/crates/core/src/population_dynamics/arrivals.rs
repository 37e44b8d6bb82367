use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::tree_model::{poisson, CountLaw, OffspringLaw};

/// Children of a colour-1 root classified by the colour of their belief's
/// top coordinate and by which tilt produced it. Index `m - 2` in `eq` and
/// `neq` holds colour `m`; colour 1 can only be reached through the
/// `(1 - x)` tilt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalCounts {
    pub first_neq: u64,
    pub eq: Vec<u64>,
    pub neq: Vec<u64>,
}

impl ArrivalCounts {
    pub fn total(&self) -> u64 {
        self.first_neq + self.eq.iter().sum::<u64>() + self.neq.iter().sum::<u64>()
    }
}

pub(crate) fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|b| b.sample(rng)).unwrap_or(0)
}

/// Category probabilities of a single child: colour 1 via the second tilt,
/// then for each colour `m >= 2` via the first and the second tilt.
fn category_probs(k: usize, p_neq: f64) -> (f64, f64, f64) {
    let km1 = (k - 1) as f64;
    (p_neq / km1, (1.0 - p_neq) / km1, (k - 2) as f64 * p_neq / (km1 * km1))
}

/// Split `total` children over the categories, with each category further
/// thinned by the given keep probabilities.
pub(crate) fn multinomial_split<R: Rng + ?Sized>(
    total: u64,
    k: usize,
    p_neq: f64,
    keep_eq: f64,
    keep_neq: f64,
    rng: &mut R,
) -> ArrivalCounts {
    let (a, b, c) = category_probs(k, p_neq);
    let n_cat = 2 * k - 1;
    let mut counts = vec![0u64; n_cat];
    let (mut left, mut rest) = (total, 1.0f64);
    for (i, slot) in counts.iter_mut().enumerate() {
        let p = if i == 0 { a } else if i % 2 == 1 { b } else { c };
        // The last category absorbs whatever rounding left behind.
        let n = if i == n_cat - 1 || rest <= p { left } else { binomial(left, p / rest, rng) };
        *slot = n;
        left -= n;
        rest -= p;
    }
    let first = counts[0];
    let eq: Vec<u64> = counts[1..].iter().step_by(2).copied().collect();
    let neq: Vec<u64> = counts[2..].iter().step_by(2).copied().collect();
    ArrivalCounts {
        first_neq: binomial(first, keep_neq, rng),
        eq: eq.into_iter().map(|n| binomial(n, keep_eq, rng)).collect(),
        neq: neq.into_iter().map(|n| binomial(n, keep_neq, rng)).collect(),
    }
}

pub(crate) fn thinned_arrivals<R: Rng + ?Sized>(
    law: &OffspringLaw,
    k: usize,
    p_neq: f64,
    keep_eq: f64,
    keep_neq: f64,
    rng: &mut R,
) -> ArrivalCounts {
    match *law {
        OffspringLaw::Poisson { mean } => {
            let dd = mean / (k - 1) as f64;
            let neq_rate = (k - 2) as f64 / (k - 1) as f64 * p_neq * dd * keep_neq;
            let first_neq = poisson(p_neq * dd * keep_neq, rng);
            let mut eq = Vec::with_capacity(k - 1);
            let mut neq = Vec::with_capacity(k - 1);
            for _ in 0..k - 1 {
                eq.push(poisson((1.0 - p_neq) * dd * keep_eq, rng));
                neq.push(poisson(neq_rate, rng));
            }
            ArrivalCounts { first_neq, eq, neq }
        }
        _ => {
            let total = law.sample_count(rng);
            multinomial_split(total, k, p_neq, keep_eq, keep_neq, rng)
        }
    }
}

/// Arrival counts at a colour-1 root. Poisson trees give independent
/// Poisson counts; other laws draw the degree and split it multinomially.
pub fn sample_arrivals<R: Rng + ?Sized>(law: &OffspringLaw, k: usize, p_neq: f64, rng: &mut R) -> ArrivalCounts {
    thinned_arrivals(law, k, p_neq, 1.0, 1.0, rng)
}
