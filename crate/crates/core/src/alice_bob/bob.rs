//! Bob's side: the array he receives and the belief he computes from it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::permutation::{nu1_mix, nu2_mix, PermutationAction};
use super::run::combine;
use crate::belief_recursion::SimplexVector;
use crate::error::{invalid, ReconError, Result};

/// One node of Bob's array: its child count and `(p, eta)`, or `None` for
/// the erased symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobNode {
    pub children: u32,
    pub entry: Option<(f64, usize)>,
}

/// The manipulated array, nodes in preorder. Colours are 0-based in memory
/// and 1-based in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct BobArray {
    k: usize,
    depth: u32,
    nodes: Vec<BobNode>,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    children: u32,
    b: Option<(f64, usize)>,
}

#[derive(Serialize, Deserialize)]
struct JsonArray {
    k: usize,
    depth: u32,
    nodes: Vec<JsonNode>,
}

impl BobArray {
    pub(crate) fn new(k: usize, depth: u32, nodes: Vec<BobNode>) -> Self {
        Self { k, depth, nodes }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn nodes(&self) -> &[BobNode] {
        &self.nodes
    }

    pub fn to_json(&self) -> Result<String> {
        let j = JsonArray {
            k: self.k,
            depth: self.depth,
            nodes: self.nodes.iter().map(|n| JsonNode { children: n.children, b: n.entry.map(|(p, e)| (p, e + 1)) }).collect(),
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: JsonArray = serde_json::from_str(s)?;
        let mut nodes = Vec::with_capacity(j.nodes.len());
        for n in j.nodes {
            let entry = match n.b {
                None => None,
                Some((p, e)) if (1..=j.k).contains(&e) && (0.0..=1.0).contains(&p) => Some((p, e - 1)),
                Some((p, e)) => return Err(ReconError::Parse(format!("entry ({p}, {e}) out of range for k = {}", j.k))),
            };
            nodes.push(BobNode { children: n.children, entry });
        }
        let a = Self { k: j.k, depth: j.depth, nodes };
        a.check_shape()?;
        Ok(a)
    }

    fn check_shape(&self) -> Result<()> {
        if self.k < 3 {
            return Err(ReconError::Parse(format!("k = {} < 3", self.k)));
        }
        let mut open = 1usize;
        for n in &self.nodes {
            if open == 0 {
                return Err(ReconError::Parse("nodes after the tree closed".into()));
            }
            open = open - 1 + n.children as usize;
        }
        if open != 0 {
            return Err(ReconError::Parse(format!("{open} nodes missing from the array")));
        }
        Ok(())
    }

    /// The array with every colour sent through `pi`.
    pub fn relabelled(&self, pi: &PermutationAction) -> Result<Self> {
        if pi.k() != self.k {
            return invalid("permutation size differs from k");
        }
        let nodes = self.nodes.iter().map(|n| BobNode { children: n.children, entry: n.entry.map(|(p, e)| (p, pi.apply(e))) }).collect();
        Ok(Self { nodes, ..self.clone() })
    }

    /// Bob's belief on the root colour.
    pub fn belief(&self) -> Result<SimplexVector> {
        let mut at = 0;
        match self.eval(&mut at, 0)? {
            Some(b) => Ok(b),
            None => invalid("root entry is erased"),
        }
    }

    fn eval(&self, at: &mut usize, level: u32) -> Result<Option<SimplexVector>> {
        let node = self.nodes[*at];
        *at += 1;
        let mut kids = Vec::new();
        for _ in 0..node.children {
            if let Some(b) = self.eval(at, level + 1)? {
                kids.push(b);
            }
        }
        let Some((p, eta)) = node.entry else { return Ok(None) };
        let before = if level == self.depth {
            SimplexVector::point(self.k, eta)
        } else {
            combine(self.k, kids.iter().map(|b| b.0.as_slice()))?
        };
        Ok(Some(nu2_mix(&nu1_mix(&before, eta), p)))
    }
}

/// Largest deviation, over `trials` uniform relabellings `pi` of the array,
/// between the new belief at `pi(l)` and the old belief at `l`.
pub fn equivariance_check<R: Rng + ?Sized>(board: &BobArray, trials: usize, rng: &mut R) -> Result<f64> {
    let base = board.belief()?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let pi = PermutationAction::sample_uniform(board.k, rng);
        let moved = board.relabelled(&pi)?.belief()?;
        let expected = pi.inverse().act_on(&base);
        worst = worst.max(moved.max_abs_diff(&expected));
    }
    Ok(worst)
}
