//! Coupling of the observed tree with a draw from a dominated measure.
//!
//! Alice sees the tree and its colouring and hands Bob an array of
//! `(p, colour)` pairs, one per node. Bob's belief on the root colour,
//! computed from the array alone, is then distributed exactly as the target
//! measure of the reductions.

mod bob;
mod fixture;
mod permutation;
mod run;

pub use bob::{equivariance_check, BobArray, BobNode};
pub use fixture::{find_dominated, root_top_values, truncation_tv_bound, RootExperiment, TruncationBound};
pub use permutation::{nu1_mix, nu2_mix, PermutationAction};
pub use run::{
    dominance_excess, run_alice, sample_instance, Action, AliceOutcome, Instance, ManipulationRecord, Reductions,
};
