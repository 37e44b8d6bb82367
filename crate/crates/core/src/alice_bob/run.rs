//! Alice's bottom-up pass over one observed tree.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use super::bob::{BobArray, BobNode};
use super::permutation::{draw_nu2_into, PermutationAction};
use crate::belief_recursion::{normalise_log_weights, SimplexVector};
use crate::error::{invalid, Result};
use crate::population_dynamics::step_image;
use crate::rng::{splitmix, RngStream};
use crate::star_measures::{QuantileReduction, StarMeasure};
use crate::tree_model::{CountLaw, OffspringLaw, TreeSample};

/// One observed instance: tree, broadcast colouring, one uniform key per
/// node and, for the regular-tree variant, the number of children kept at
/// each node.
#[derive(Clone, Debug)]
pub struct Instance {
    pub k: usize,
    pub tree: TreeSample,
    pub colours: Vec<usize>,
    /// `U_v` as 64 random bits.
    pub keys: Vec<u64>,
    pub kept: Option<Vec<u32>>,
}

/// Draw a tree of depth `depth` from `law`, its colouring and node keys from
/// one sequential stream. With `keep`, every non-boundary node also draws
/// the number of leading children Alice keeps.
pub fn sample_instance(
    k: usize,
    law: &OffspringLaw,
    depth: u32,
    keep: Option<&OffspringLaw>,
    stream: RngStream,
) -> Result<Instance> {
    if k < 3 {
        return invalid(format!("k = {k} < 3"));
    }
    law.validate()?;
    let mut rng = stream.rng();
    let mut counts: Vec<u32> = Vec::new();
    let mut levels = vec![0u32];
    let mut colours = vec![rng.random_range(0..k)];
    let mut keys = Vec::new();
    let mut kept = keep.map(|_| Vec::new());
    let mut v = 0;
    while v < colours.len() {
        keys.push(rng.random::<u64>());
        let c = if levels[v] < depth { law.sample_count(&mut rng) as u32 } else { 0 };
        counts.push(c);
        if let (Some(kl), Some(kv)) = (keep, kept.as_mut()) {
            kv.push(if levels[v] < depth { (kl.sample_count(&mut rng) as u32).min(c) } else { 0 });
        }
        for _ in 0..c {
            let x = rng.random_range(0..k - 1);
            colours.push(if x >= colours[v] { x + 1 } else { x });
            levels.push(levels[v] + 1);
        }
        v += 1;
    }
    Ok(Instance { k, tree: TreeSample::from_child_counts(&counts, depth)?, colours, keys, kept })
}

/// The two reductions Alice uses: `leaf` sends the frozen law to the target,
/// `step` sends the one-step image of the target back to it.
#[derive(Clone, Debug)]
pub struct Reductions {
    target: StarMeasure,
    leaf: QuantileReduction,
    step: QuantileReduction,
    excess: f64,
}

impl Reductions {
    /// Build from an empirical one-step image of `target` under `law` with
    /// `n_dom` samples. Fails if the image falls below the target by more
    /// than `slack` anywhere.
    pub fn new(target: &StarMeasure, law: &OffspringLaw, n_dom: usize, slack: f64, stream: RngStream) -> Result<Self> {
        let image = step_image(target, law, n_dom, stream)?;
        Self::from_image(target, &image, slack)
    }

    /// Build from a given one-step image of `target`.
    pub fn from_image(target: &StarMeasure, image: &StarMeasure, slack: f64) -> Result<Self> {
        let excess = dominance_excess(image, target);
        if excess > slack {
            return Err(crate::ReconError::NotDominated(format!(
                "one-step image sits below the target by {excess:.4} > {slack:.4}"
            )));
        }
        Ok(Self {
            target: target.clone(),
            leaf: QuantileReduction::new(&StarMeasure::frozen(target.k()), target)?,
            step: QuantileReduction::new(image, target)?,
            excess,
        })
    }

    pub fn k(&self) -> usize {
        self.target.k()
    }

    pub fn target(&self) -> &StarMeasure {
        &self.target
    }

    /// `sup_x (F_image(x) - F_target(x))` seen at construction.
    pub fn excess(&self) -> f64 {
        self.excess
    }
}

/// `sup_x (F_upper(x) - F_lower(x))`: how far `upper` fails to dominate `lower`.
pub fn dominance_excess(upper: &StarMeasure, lower: &StarMeasure) -> f64 {
    let (a, b) = (upper.values(), lower.values());
    let (ma, mb) = (a.mass(), b.mass());
    a.points()
        .iter()
        .chain(b.points())
        .map(|&x| a.cdf(x) / ma - b.cdf(x) / mb)
        .fold(0.0, f64::max)
}

/// Alice's action at one node.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub p: f64,
    pub l: usize,
    pub pi1: PermutationAction,
    pub pi2: PermutationAction,
}

impl Action {
    /// `pi2 ∘ pi1`.
    pub fn pi(&self) -> PermutationAction {
        self.pi2.compose(&self.pi1)
    }
}

/// Everything Alice did, indexed by node in breadth-first order, plus the
/// array handed to Bob. Erased nodes have `None` everywhere.
#[derive(Clone, Debug)]
pub struct ManipulationRecord {
    pub actions: Vec<Option<Action>>,
    /// Bob's belief before Alice acts at the node.
    pub before: Vec<Option<SimplexVector>>,
    /// Bob's belief given the node's own array.
    pub after: Vec<Option<SimplexVector>>,
    pub board: BobArray,
}

#[derive(Clone, Debug)]
pub struct AliceOutcome {
    /// Bob's final belief on the root colour.
    pub belief: SimplexVector,
    /// Its distinguished coordinate as constructed. Equals `belief.max()`
    /// except at the uniform vector, where the others can round one ulp above.
    pub top: f64,
    pub record: Option<ManipulationRecord>,
}

const TAG_TIE: u64 = 0x7469_6531;
const TAG_P: u64 = 0x7061_7232;
const TAG_PERM: u64 = 0x7065_7233;

fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `(U1, U2, generator for U3)` split from one node key.
fn split_key(key: u64) -> (f64, f64, Pcg64Mcg) {
    (unit(splitmix(key ^ TAG_TIE)), unit(splitmix(key ^ TAG_P)), Pcg64Mcg::seed_from_u64(splitmix(key ^ TAG_PERM)))
}

/// `P°` from the children's beliefs: normalised products of `1 - P_u`.
pub(crate) fn combine<'a>(k: usize, children: impl Iterator<Item = &'a [f64]>) -> Result<SimplexVector> {
    let mut logs = vec![0.0; k];
    for b in children {
        for (l, x) in logs.iter_mut().zip(b) {
            *l += (-x).ln_1p();
        }
    }
    SimplexVector::from_log_weights(&logs)
}

/// Run Alice's construction on `inst`. With `record`, also return her
/// actions and Bob's array; the belief does not depend on the flag.
pub fn run_alice(inst: &Instance, red: &Reductions, record: bool) -> Result<AliceOutcome> {
    let k = inst.k;
    if red.k() != k {
        return invalid(format!("reductions built for k = {} used with k = {k}", red.k()));
    }
    let t = &inst.tree;
    let n = t.len();
    let kf = k as f64;
    let k1 = (k - 1) as f64;
    let kept = |v: usize| inst.kept.as_ref().map_or(t.child_count(v), |kv| kv[v] as usize);
    let mut erased = vec![false; n];
    if inst.kept.is_some() {
        for v in 0..n {
            for (i, u) in t.children(v).enumerate() {
                erased[u] = erased[v] || i >= kept(v);
            }
        }
    }
    let mut beliefs = vec![0.0f64; n * k];
    let mut top = f64::NAN;
    let (mut logs, mut p0, mut sorted, mut perm) = (vec![0.0f64; k], vec![0.0f64; k], Vec::with_capacity(k), Vec::with_capacity(k));
    let mut actions: Vec<Option<Action>> = if record { vec![None; n] } else { Vec::new() };
    let mut before: Vec<Option<SimplexVector>> = if record { vec![None; n] } else { Vec::new() };
    let mut after: Vec<Option<SimplexVector>> = if record { vec![None; n] } else { Vec::new() };
    for v in (0..n).rev() {
        if erased[v] {
            continue;
        }
        let (u1, u2, mut prng) = split_key(inst.keys[v]);
        let (l, y, p) = if t.is_boundary(v) {
            let c = inst.colours[v];
            if record {
                p0.fill(0.0);
                p0[c] = 1.0;
            }
            (c, 1.0, red.leaf.p(1.0, u2))
        } else {
            logs.fill(0.0);
            for u in t.children(v).take(kept(v)) {
                for (lg, x) in logs.iter_mut().zip(&beliefs[u * k..(u + 1) * k]) {
                    *lg += (-*x).ln_1p();
                }
            }
            normalise_log_weights(&logs, &mut p0, &mut sorted)?;
            let y = p0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ties = p0.iter().filter(|&&x| x == y).count();
            let pick = ((u1 * ties as f64) as usize).min(ties - 1);
            let l = (0..k).filter(|&m| p0[m] == y).nth(pick).expect("pick < ties");
            (l, y, red.step.p(y, u2))
        };
        let shuffled = draw_nu2_into(k, p, &mut prng, &mut perm);
        let eta = if shuffled { perm[l] } else { l };
        // Same operations as `nu2_mix(nu1_mix(..))`, so Bob agrees bit for bit.
        let share = p / kf;
        let hi = (1.0 - p) * y + share;
        let lo = (1.0 - p) * ((1.0 - y) / k1) + share;
        if v == 0 {
            top = hi;
        }
        for (m, b) in beliefs[v * k..(v + 1) * k].iter_mut().enumerate() {
            *b = if m == eta { hi } else { lo };
        }
        if record {
            let pi2 = if shuffled { PermutationAction::from_images(perm.clone())? } else { PermutationAction::identity(k) };
            let pi1 = PermutationAction::sample_nu1(k, l, &mut prng);
            actions[v] = Some(Action { p, l, pi1, pi2 });
            before[v] = Some(SimplexVector(p0.clone()));
            after[v] = Some(SimplexVector(beliefs[v * k..(v + 1) * k].to_vec()));
        }
    }
    let belief = SimplexVector(beliefs[..k].to_vec());
    let record = record.then(|| {
        let board = board_from_actions(inst, &actions);
        ManipulationRecord { actions, before, after, board }
    });
    Ok(AliceOutcome { belief, top, record })
}

/// Bob's array: `eta_{w,root} = (pi_root ∘ ... ∘ pi_parent)(pi2_w(l_w))`,
/// composed top-down one node at a time.
fn board_from_actions(inst: &Instance, actions: &[Option<Action>]) -> BobArray {
    let t = &inst.tree;
    let n = t.len();
    let mut prefix: Vec<Option<PermutationAction>> = vec![None; n];
    let mut entries: Vec<Option<(f64, usize)>> = vec![None; n];
    for v in 0..n {
        let Some(a) = &actions[v] else { continue };
        let up = t.parent(v).and_then(|q| prefix[q].clone());
        let own = a.pi2.apply(a.l);
        let eta = up.as_ref().map_or(own, |pr| pr.apply(own));
        entries[v] = Some((a.p, eta));
        let pi = a.pi();
        prefix[v] = Some(match up {
            Some(pr) => pr.compose(&pi),
            None => pi,
        });
    }
    let nodes = t
        .preorder()
        .into_iter()
        .map(|v| BobNode { children: t.child_count(v) as u32, entry: entries[v] })
        .collect();
    BobArray::new(inst.k, t.depth_cap(), nodes)
}
