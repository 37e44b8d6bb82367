//! Reconstruction experiments for the proper-colouring broadcast model on
//! Galton–Watson trees.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alice_bob;
pub mod belief_recursion;
pub mod candidate_measure;
pub mod error;
pub mod numerics;
pub mod population_dynamics;
pub mod par;
pub mod rng;
pub mod star_measures;
pub mod thresholds;
pub mod tree_model;

pub use error::{ReconError, Result};
