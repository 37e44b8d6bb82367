use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief_recursion::SimplexVector;
use crate::error::{invalid, Result};

/// A permutation of the colours in array form: `image[x]` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationAction {
    image: Vec<usize>,
}

impl PermutationAction {
    pub fn identity(k: usize) -> Self {
        Self { image: (0..k).collect() }
    }

    pub fn from_images(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || seen[x] {
                return invalid(format!("{image:?} is not a permutation"));
            }
            seen[x] = true;
        }
        Ok(Self { image })
    }

    /// Uniform over all permutations.
    pub fn sample_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (0..k).collect();
        image.shuffle(rng);
        Self { image }
    }

    /// Uniform over the permutations fixing `l`.
    pub fn sample_nu1<R: Rng + ?Sized>(k: usize, l: usize, rng: &mut R) -> Self {
        let mut rest: Vec<usize> = (0..k).filter(|&x| x != l).collect();
        rest.shuffle(rng);
        let mut image = Vec::with_capacity(k);
        let mut it = rest.into_iter();
        for x in 0..k {
            image.push(if x == l { l } else { it.next().expect("k - 1 entries") });
        }
        Self { image }
    }

    /// Uniform with probability `p`, the identity otherwise.
    pub fn sample_nu2<R: Rng + ?Sized>(k: usize, p: f64, rng: &mut R) -> Self {
        let mut image = Vec::new();
        if draw_nu2_into(k, p, rng, &mut image) {
            Self { image }
        } else {
            Self::identity(k)
        }
    }

    pub fn k(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ other`, i.e. `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { image: other.image.iter().map(|&x| self.image[x]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.k()];
        for (x, &y) in self.image.iter().enumerate() {
            image[y] = x;
        }
        Self { image }
    }

    /// `(π ∘ x)^{(l)} = x^{(π(l))}`.
    pub fn act_on(&self, x: &SimplexVector) -> SimplexVector {
        SimplexVector(self.image.iter().map(|&m| x.0[m]).collect())
    }
}

/// The draw of [`PermutationAction::sample_nu2`] written into `buf`. Returns
/// false, leaving `buf` untouched, when the identity was drawn.
pub(crate) fn draw_nu2_into<R: Rng + ?Sized>(k: usize, p: f64, rng: &mut R, buf: &mut Vec<usize>) -> bool {
    if rng.random::<f64>() < p {
        buf.clear();
        buf.extend(0..k);
        buf.shuffle(rng);
        true
    } else {
        false
    }
}

/// Belief after a permutation drawn from `nu1(l)`: coordinate `l` is kept
/// and the others share the remaining mass evenly.
pub fn nu1_mix(f: &SimplexVector, l: usize) -> SimplexVector {
    let k = f.k();
    let top = f.0[l];
    let rest = (1.0 - top) / (k - 1) as f64;
    SimplexVector((0..k).map(|m| if m == l { top } else { rest }).collect())
}

/// Belief after a permutation drawn from `nu2(p)`: `(1 - p) f + p * uniform`.
pub fn nu2_mix(f: &SimplexVector, p: f64) -> SimplexVector {
    let share = p / f.k() as f64;
    SimplexVector(f.0.iter().map(|&x| (1.0 - p) * x + share).collect())
}
