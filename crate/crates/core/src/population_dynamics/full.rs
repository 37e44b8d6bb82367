use rand::Rng;

use crate::belief_recursion::SimplexVector;
use crate::error::{invalid, Result};
use crate::star_measures::{StarMeasure, StarVector};
use crate::tree_model::{CountLaw, OffspringLaw};

/// Largest colour count for which the literal simplex step is allowed.
pub const MAX_FULL_K: usize = 64;

/// Star vector drawn from the symmetric lift of `pop` tilted by its
/// coordinate `l`, i.e. the belief of a child whose true colour is `l`.
/// Rejection sampling: propose a uniform colour, accept with probability
/// equal to coordinate `l`.
pub fn sample_tilted_child<R: Rng + ?Sized>(pop: &StarMeasure, l: usize, rng: &mut R) -> StarVector {
    let k = pop.k();
    loop {
        let s = StarVector { value: pop.values().sample(rng), colour: rng.random_range(0..k), k };
        if rng.random::<f64>() < s.coord(l) {
            return s;
        }
    }
}

/// One sample of the root belief after a literal step on simplex vectors:
/// children get uniform colours other than `root_colour`, each brings a
/// tilted belief, and the root multiplies `1 - x^(m)` over children.
pub fn gamma_full_step<R: Rng + ?Sized>(pop: &StarMeasure, law: &OffspringLaw, root_colour: usize, rng: &mut R) -> Result<SimplexVector> {
    let k = pop.k();
    if k > MAX_FULL_K {
        return invalid(format!("literal step limited to k <= {MAX_FULL_K}, got {k}"));
    }
    let n = law.sample_count(rng);
    let mut logs = vec![0.0f64; k];
    for _ in 0..n {
        let mut l = rng.random_range(0..k - 1);
        if l >= root_colour {
            l += 1;
        }
        let child = sample_tilted_child(pop, l, rng);
        for (m, acc) in logs.iter_mut().enumerate() {
            *acc += (1.0 - child.coord(m)).ln();
        }
    }
    SimplexVector::from_log_weights(&logs)
}

/// Colour-symmetrised step: the root colour is drawn uniformly first.
pub fn gamma_s_full_step<R: Rng + ?Sized>(pop: &StarMeasure, law: &OffspringLaw, rng: &mut R) -> Result<SimplexVector> {
    let root = rng.random_range(0..pop.k());
    gamma_full_step(pop, law, root, rng)
}
