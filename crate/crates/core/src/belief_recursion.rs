//! Exact root posterior given boundary colours, by the product recursion
//! over children, plus a brute-force enumeration used as its oracle.

use crate::error::{invalid, ReconError, Result};
use crate::tree_model::TreeSample;

/// Probability vector over the `k` colours.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVector(pub Vec<f64>);

impl SimplexVector {
    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn point(k: usize, colour: usize) -> Self {
        let mut v = vec![0.0; k];
        v[colour] = 1.0;
        Self(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Normalise `exp(logs)`, where `-inf` entries are exact zeros. The sum
    /// is taken over sorted terms, so it does not depend on colour order.
    pub fn from_log_weights(logs: &[f64]) -> Result<Self> {
        let mut out = vec![0.0; logs.len()];
        normalise_log_weights(logs, &mut out, &mut Vec::new())?;
        Ok(Self(out))
    }
}

/// [`SimplexVector::from_log_weights`] into `out`, using `scratch` for the
/// sorted terms.
pub(crate) fn normalise_log_weights(logs: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(ReconError::InconsistentBoundary);
    }
    for (o, &l) in out.iter_mut().zip(logs) {
        *o = (l - top).exp();
    }
    scratch.clear();
    scratch.extend_from_slice(out);
    scratch.sort_by(f64::total_cmp);
    let s: f64 = scratch.iter().sum();
    for o in out.iter_mut() {
        *o /= s;
    }
    Ok(())
}

/// Posterior of the root colour under the broadcast model given the
/// colours of the boundary vertices. Only boundary entries of `colours`
/// are read.
pub fn exact_posterior(tree: &TreeSample, colours: &[usize], k: usize) -> Result<SimplexVector> {
    if k < 2 {
        return invalid(format!("k = {k} < 2"));
    }
    let mut msg: Vec<Option<SimplexVector>> = vec![None; tree.len()];
    for v in (0..tree.len()).rev() {
        let m = if tree.is_boundary(v) {
            SimplexVector::point(k, colours[v])
        } else if tree.child_count(v) == 0 {
            SimplexVector::uniform(k)
        } else {
            let mut logs = vec![0.0; k];
            for u in tree.children(v) {
                let f = msg[u].take().expect("children are processed first");
                for (l, x) in logs.iter_mut().enumerate() {
                    *x += (1.0 - f.0[l]).ln();
                }
            }
            SimplexVector::from_log_weights(&logs)?
        };
        msg[v] = Some(m);
    }
    Ok(msg[0].take().expect("root"))
}

/// The same posterior by enumerating every proper colouring of the
/// non-boundary vertices. Exponential; refuses more than `max_free`
/// free vertices.
pub fn brute_force_posterior(tree: &TreeSample, colours: &[usize], k: usize, max_free: usize) -> Result<SimplexVector> {
    let free: Vec<usize> = (0..tree.len()).filter(|&v| !tree.is_boundary(v)).collect();
    if free.len() > max_free {
        return invalid(format!("{} free vertices exceed the limit {max_free}", free.len()));
    }
    let mut assign: Vec<usize> = (0..tree.len()).map(|v| if tree.is_boundary(v) { colours[v] } else { usize::MAX }).collect();
    let mut counts = vec![0.0f64; k];

    fn ok(tree: &TreeSample, assign: &[usize], v: usize) -> bool {
        // Parent constraint, and constraints to already fixed boundary children.
        if let Some(p) = tree.parent(v) {
            if assign[p] == assign[v] {
                return false;
            }
        }
        tree.children(v).all(|u| !tree.is_boundary(u) || assign[u] != assign[v])
    }

    fn rec(tree: &TreeSample, free: &[usize], i: usize, k: usize, assign: &mut Vec<usize>, counts: &mut [f64]) {
        if i == free.len() {
            counts[assign[0]] += 1.0;
            return;
        }
        let v = free[i];
        for c in 0..k {
            assign[v] = c;
            if ok(tree, assign, v) {
                rec(tree, free, i + 1, k, assign, counts);
            }
        }
        assign[v] = usize::MAX;
    }

    if free.is_empty() {
        // Root on the boundary.
        return Ok(SimplexVector::point(k, colours[0]));
    }
    rec(tree, &free, 0, k, &mut assign, &mut counts);
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Err(ReconError::InconsistentBoundary);
    }
    Ok(SimplexVector(counts.into_iter().map(|c| c / total).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::tree_model::{broadcast_colouring, sample_tree, OffspringLaw};

    #[test]
    fn star_with_two_leaf_colours() {
        // Root with two boundary children coloured 0 and 1: root must be 2.
        let t = TreeSample::from_child_counts(&[2, 0, 0], 1).unwrap();
        let p = exact_posterior(&t, &[0, 0, 1], 3).unwrap();
        assert_eq!(p.0, vec![0.0, 0.0, 1.0]);
        let q = brute_force_posterior(&t, &[0, 0, 1], 3, 10).unwrap();
        assert_eq!(q.0, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn single_child_excludes_one_colour() {
        let t = TreeSample::from_child_counts(&[1, 0], 1).unwrap();
        let p = exact_posterior(&t, &[0, 1], 4).unwrap();
        assert_eq!(p.0, vec![1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn extinct_branch_is_uninformative() {
        // Root has an internal child with no children.
        let t = TreeSample::from_child_counts(&[1, 0], 2).unwrap();
        let p = exact_posterior(&t, &[0, 0], 3).unwrap();
        assert_eq!(p, SimplexVector::uniform(3));
    }

    #[test]
    fn matches_enumeration_on_random_trees() {
        let law = OffspringLaw::Poisson { mean: 2.0 };
        let mut checked = 0;
        for i in 0..60 {
            let s = RngStream::new(11).substream(i);
            let t = sample_tree(&law, 3, s.labelled("tree"), 200).unwrap();
            let k = 3 + (i as usize % 2);
            let c = broadcast_colouring(&t, k, None, s.labelled("colour")).unwrap();
            let Ok(bf) = brute_force_posterior(&t, &c, k, 9) else { continue };
            let ex = exact_posterior(&t, &c, k).unwrap();
            assert!(ex.max_abs_diff(&bf) < 1e-12);
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn two_colour_path_is_rigid() {
        let t = TreeSample::from_child_counts(&[1, 1, 0], 2).unwrap();
        let p = exact_posterior(&t, &[0, 0, 1], 2).unwrap();
        assert_eq!(p.0, vec![0.0, 1.0]);
        assert_eq!(brute_force_posterior(&t, &[0, 0, 1], 2, 5).unwrap().0, vec![0.0, 1.0]);
    }

    #[test]
    fn no_boundary_gives_uniform() {
        // Root whose only child died out: nothing observed.
        let t = TreeSample::from_child_counts(&[0], 2).unwrap();
        assert_eq!(brute_force_posterior(&t, &[0], 4, 5).unwrap(), SimplexVector::uniform(4));
        assert_eq!(exact_posterior(&t, &[0], 4).unwrap(), SimplexVector::uniform(4));
    }

    #[test]
    fn contradictory_boundary_is_reported() {
        // Root with three boundary children of all three colours.
        let t = TreeSample::from_child_counts(&[3, 0, 0, 0], 1).unwrap();
        assert!(matches!(exact_posterior(&t, &[0, 0, 1, 2], 3), Err(ReconError::InconsistentBoundary)));
    }
}
