//! Galton–Watson trees and the proper-colouring broadcast on them.
//!
//! Trees are stored breadth-first in flat arrays, so the children of a node
//! are contiguous. Randomness is keyed by the path from the root: node `v`
//! uses stream `base.substream(i_1).substream(i_2)...` where `i_j` are child
//! indices. Any subtree can therefore be regenerated on its own.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, ReconError, Result};
use crate::rng::RngStream;

/// Anything that can produce a random non-negative count.
pub trait CountLaw {
    fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64;
}

impl CountLaw for u64 {
    fn sample_count<R: Rng + ?Sized>(&self, _rng: &mut R) -> u64 {
        *self
    }
}

/// Draw from Poisson(`mean`); zero mean gives zero.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

/// Offspring distribution of the tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OffspringLaw {
    Poisson { mean: f64 },
    Deterministic { arity: u32 },
    /// `D' 1{D' <= cap}` with `D' ~ Poisson(mean)`: overflow means no children.
    TruncatedPoisson { mean: f64, cap: u32 },
}

impl OffspringLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Poisson { mean } | Self::TruncatedPoisson { mean, .. } if !(mean > 0.0 && mean.is_finite()) => {
                invalid(format!("offspring mean must be positive, got {mean}"))
            }
            Self::Deterministic { arity: 0 } => invalid("arity must be positive"),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Poisson { mean } => mean,
            Self::Deterministic { arity } => arity as f64,
            Self::TruncatedPoisson { cap: 0, .. } => 0.0,
            Self::TruncatedPoisson { mean, cap } => {
                // E[D 1{D <= cap}] = mean * P(Poisson(mean) <= cap - 1)
                mean * statrs::function::gamma::gamma_ur(cap as f64, mean)
            }
        }
    }
}

impl CountLaw for OffspringLaw {
    fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Self::Poisson { mean } => poisson(mean, rng),
            Self::Deterministic { arity } => arity as u64,
            Self::TruncatedPoisson { mean, cap } => {
                let d = poisson(mean, rng);
                if d > cap as u64 {
                    0
                } else {
                    d
                }
            }
        }
    }
}

impl FromStr for OffspringLaw {
    type Err = ReconError;

    /// Parses `poisson:d`, `dary:d` or `tpois:d',d`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || ReconError::Parse(format!("unrecognised offspring law '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let law = match kind.trim() {
            "poisson" => Self::Poisson { mean: arg.trim().parse().map_err(|_| bad())? },
            "dary" => Self::Deterministic { arity: arg.trim().parse().map_err(|_| bad())? },
            "tpois" => {
                let (m, c) = arg.split_once(',').ok_or_else(bad)?;
                Self::TruncatedPoisson {
                    mean: m.trim().parse().map_err(|_| bad())?,
                    cap: c.trim().parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Poisson { mean } => write!(f, "poisson:{mean}"),
            Self::Deterministic { arity } => write!(f, "dary:{arity}"),
            Self::TruncatedPoisson { mean, cap } => write!(f, "tpois:{mean},{cap}"),
        }
    }
}

pub const NO_PARENT: u32 = u32::MAX;

/// A rooted tree truncated at depth `depth_cap`, in breadth-first order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSample {
    parent: Vec<u32>,
    depth: Vec<u32>,
    first_child: Vec<u32>,
    n_children: Vec<u32>,
    depth_cap: u32,
}

impl TreeSample {
    /// Build from per-node child counts listed in breadth-first order.
    pub fn from_child_counts(counts: &[u32], depth_cap: u32) -> Result<Self> {
        let mut t = Self { parent: vec![NO_PARENT], depth: vec![0], first_child: vec![], n_children: vec![], depth_cap };
        let mut v = 0;
        while v < t.parent.len() {
            let c = *counts.get(v).ok_or_else(|| ReconError::Parse("child counts end early".into()))?;
            if t.depth[v] == depth_cap && c != 0 {
                return invalid("node at the depth cap has children");
            }
            t.first_child.push(t.parent.len() as u32);
            t.n_children.push(c);
            for _ in 0..c {
                t.parent.push(v as u32);
                t.depth.push(t.depth[v] + 1);
            }
            v += 1;
        }
        if counts.len() != t.parent.len() {
            return invalid("child counts have trailing entries");
        }
        Ok(t)
    }

    /// Complete `d`-ary tree of the given depth.
    pub fn regular(d: u32, depth_cap: u32) -> Result<Self> {
        let mut counts = Vec::new();
        let mut width = 1u64;
        for level in 0..=depth_cap {
            let c = if level == depth_cap { 0 } else { d };
            counts.extend(std::iter::repeat_n(c, width as usize));
            width *= d as u64;
            if counts.len() as u64 + width > u32::MAX as u64 {
                return Err(ReconError::NodeCeiling(u32::MAX as usize));
            }
        }
        Self::from_child_counts(&counts, depth_cap)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let f = self.first_child[v] as usize;
        f..f + self.n_children[v] as usize
    }

    pub fn child_count(&self, v: usize) -> usize {
        self.n_children[v] as usize
    }

    /// Index of `v` among its parent's children.
    pub fn child_index(&self, v: usize) -> usize {
        self.parent(v).map_or(0, |p| v - self.first_child[p] as usize)
    }

    /// Whether `v` lies on the boundary (at the depth cap).
    pub fn is_boundary(&self, v: usize) -> bool {
        self.depth[v] == self.depth_cap
    }

    pub fn boundary_size(&self) -> usize {
        self.depth.iter().filter(|&&d| d == self.depth_cap).count()
    }

    /// Nodes in depth-first preorder (children in index order).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children(v).rev());
        }
        out
    }

    /// Child counts in breadth-first order; inverse of
    /// [`from_child_counts`](Self::from_child_counts).
    pub fn child_counts(&self) -> &[u32] {
        &self.n_children
    }

    /// Path-keyed stream for every node, derived from `base`.
    pub fn node_streams(&self, base: RngStream) -> Vec<RngStream> {
        let mut s = Vec::with_capacity(self.len());
        s.push(base);
        for v in 1..self.len() {
            let p = self.parent[v] as usize;
            s.push(s[p].substream(self.child_index(v) as u64));
        }
        s
    }

    /// Write one line per node: `index parent depth colour`, colours 1-based
    /// and the root's parent as `-`.
    pub fn dump<W: Write>(&self, colours: &[usize], mut w: W) -> Result<()> {
        if colours.len() != self.len() {
            return invalid(format!("{} colours for {} nodes", colours.len(), self.len()));
        }
        writeln!(w, "index parent depth colour")?;
        for (v, (&d, &c)) in self.depth.iter().zip(colours).enumerate() {
            match self.parent(v) {
                None => writeln!(w, "{v} - {d} {}", c + 1)?,
                Some(p) => writeln!(w, "{v} {p} {d} {}", c + 1)?,
            }
        }
        Ok(())
    }
}

/// Sample a tree to depth `depth_cap`. Node offspring counts come from the
/// path-keyed streams under `stream`. Fails once more than `node_ceiling`
/// nodes have been created.
pub fn sample_tree(law: &OffspringLaw, depth_cap: u32, stream: RngStream, node_ceiling: usize) -> Result<TreeSample> {
    law.validate()?;
    let mut counts: Vec<u32> = Vec::new();
    let mut streams = vec![stream];
    let mut depth = vec![0u32];
    let mut v = 0;
    while v < streams.len() {
        let c = if depth[v] < depth_cap { law.sample_count(&mut streams[v].rng()) } else { 0 };
        if streams.len() as u64 + c > node_ceiling as u64 {
            return Err(ReconError::NodeCeiling(node_ceiling));
        }
        counts.push(c as u32);
        for i in 0..c {
            streams.push(streams[v].substream(i));
            depth.push(depth[v] + 1);
        }
        v += 1;
    }
    TreeSample::from_child_counts(&counts, depth_cap)
}

/// Colour of a child given its parent's colour and the child's stream:
/// uniform over the other `k - 1` colours.
pub fn child_colour(parent_colour: usize, k: usize, stream: &RngStream) -> usize {
    let c = stream.rng().random_range(0..k - 1);
    if c >= parent_colour {
        c + 1
    } else {
        c
    }
}

/// Colour of the root: uniform over `k`.
pub fn root_colour(k: usize, stream: &RngStream) -> usize {
    stream.rng().random_range(0..k)
}

/// Broadcast a proper colouring from the root. The root colour is uniform
/// unless fixed by `root`. `k = 2` is accepted for oracle tests.
pub fn broadcast_colouring(tree: &TreeSample, k: usize, root: Option<usize>, stream: RngStream) -> Result<Vec<usize>> {
    if k < 2 {
        return invalid(format!("k = {k} < 2"));
    }
    if matches!(root, Some(r) if r >= k) {
        return invalid("root colour out of range");
    }
    let streams = tree.node_streams(stream);
    let mut colours = vec![0usize; tree.len()];
    colours[0] = root.unwrap_or_else(|| root_colour(k, &streams[0]));
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root");
        colours[v] = child_colour(colours[p], k, &streams[v]);
    }
    Ok(colours)
}
